#include "reptrack/model_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "reptrack/error.hpp"
#include "reptrack/serialize.hpp"

namespace reptrack {
namespace {

constexpr std::string_view kMagic = "reptrack-model ";
constexpr std::string_view kChecksum = "checksum ";

ModelFileError corrupt(const std::string& what) {
  return ModelFileError(ModelFileError::Kind::kCorrupt, "corrupt model file: " + what);
}

/// Splits off the first line (without its newline); throws when no newline remains.
std::string_view take_line(std::string_view& rest, const char* what) {
  auto nl = rest.find('\n');
  if (nl == std::string_view::npos) throw corrupt(std::string("missing ") + what + " line");
  auto line = rest.substr(0, nl);
  rest.remove_prefix(nl + 1);
  return line;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string serialize_model(const PipelineModel& model) {
  Writer w;
  model.save(w);
  std::string body = w.take();
  char checksum[32];
  std::snprintf(checksum, sizeof checksum, "%016llx", static_cast<unsigned long long>(fnv1a64(body)));
  return std::string(kMagic) + std::to_string(kModelFormatVersion) + "\n" + std::string(kChecksum) + checksum +
         "\n" + body;
}

PipelineModel deserialize_model(std::string_view bytes) {
  std::string_view rest = bytes;
  auto header = take_line(rest, "header");
  if (header.substr(0, kMagic.size()) != kMagic) throw corrupt("not a reptrack model file");
  auto version_text = header.substr(kMagic.size());
  int version = 0;
  auto [end, ec] = std::from_chars(version_text.data(), version_text.data() + version_text.size(), version);
  if (ec != std::errc{} || end != version_text.data() + version_text.size())
    throw corrupt("malformed format version");
  if (version != kModelFormatVersion)
    throw ModelFileError(ModelFileError::Kind::kUnsupportedVersion,
                         "unsupported model format version " + std::string(version_text) + " (expected " +
                             std::to_string(kModelFormatVersion) + ")");
  auto checksum_line = take_line(rest, "checksum");
  if (checksum_line.substr(0, kChecksum.size()) != kChecksum) throw corrupt("missing checksum line");
  auto hex = checksum_line.substr(kChecksum.size());
  std::uint64_t expected = 0;
  auto [hend, hec] = std::from_chars(hex.data(), hex.data() + hex.size(), expected, 16);
  if (hec != std::errc{} || hend != hex.data() + hex.size() || hex.size() != 16) throw corrupt("malformed checksum");
  if (fnv1a64(rest) != expected) throw corrupt("checksum mismatch");
  Reader r(rest);
  auto model = PipelineModel::load(r);
  if (!r.at_end()) throw corrupt("trailing data after the model body");
  return model;
}

void save_model(const PipelineModel& model, const std::filesystem::path& path) {
  auto bytes = serialize_model(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ModelFileError(ModelFileError::Kind::kIo, "cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ModelFileError(ModelFileError::Kind::kIo, "failed writing '" + path.string() + "'");
}

PipelineModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelFileError(ModelFileError::Kind::kIo, "cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_model(buf.str());
}

}  // namespace reptrack
