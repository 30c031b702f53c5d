#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "reptrack/cli.hpp"
#include "reptrack/config.hpp"
#include "reptrack/error.hpp"
#include "reptrack/eval.hpp"
#include "reptrack/model_io.hpp"
#include "reptrack/srl.hpp"
#include "reptrack/synth.hpp"

namespace py = pybind11;
using namespace reptrack;

namespace {

// Records cross the boundary as JSONL lines; the Python wrapper does the dict conversion.
std::vector<CorpusRecord> parse_records(const std::vector<std::string>& lines) {
  std::vector<CorpusRecord> out;
  out.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) out.push_back(parse_jsonl_record(lines[i], i + 1));
  return out;
}

std::vector<Document> parse_docs(const std::vector<std::string>& lines) {
  std::vector<Document> out;
  for (auto& r : parse_records(lines)) out.push_back(std::move(r.doc));
  return out;
}

RunConfig make_config(const std::map<std::string, std::string>& settings) {
  RunConfig cfg;
  for (const auto& [k, v] : settings) apply_setting(cfg, k, v);
  return cfg;
}

Document plain(const std::string& text) { return Document{"", text, {}, {}}; }

}  // namespace

PYBIND11_MODULE(_reptrack, m) {
  m.doc() = "Native core of the reptrack report-tracking toolkit.";

  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ModelFileError>(m, "ModelFileError", PyExc_RuntimeError);

  m.def("clean", [](const std::string& text) { return clean(text); }, py::arg("text"));
  m.def(
      "prepare",
      [](const std::string& text) {
        auto t = prepare(plain(text));
        std::vector<std::string> pos;
        for (auto p : t.pos) pos.emplace_back(to_string(p));
        return py::make_tuple(t.tokens, pos);
      },
      py::arg("text"), "Cleaned tokens and their part-of-speech tags.");
  m.def(
      "extract_tuples",
      [](const std::string& text) {
        auto t = prepare(plain(text));
        std::vector<py::tuple> out;
        auto join = [&](Range r) {
          std::string s;
          for (std::size_t i = r.start; i < r.end; ++i) s += (i > r.start ? " " : "") + t.tokens[i];
          return s;
        };
        for (const auto& p : extract_tuples(t)) out.push_back(py::make_tuple(join(p.agent), t.tokens[p.verb], join(p.detail)));
        return out;
      },
      py::arg("text"), "(agent, verb, detail) phrases found by the report filter.");
  m.def("passes_filter", [](const std::string& text) { return passes_filter(prepare(plain(text))); }, py::arg("text"));

  m.def(
      "synth",
      [](std::size_t n_docs, std::uint64_t seed, double signal_strength, double hashtag_rate, double url_rate) {
        SynthConfig c;
        c.n_docs = n_docs;
        c.seed = seed;
        c.signal_strength = signal_strength;
        c.hashtag_rate = hashtag_rate;
        c.url_rate = url_rate;
        std::vector<std::string> lines;
        for (const auto& r : generate(c)) lines.push_back(to_jsonl(r));
        return lines;
      },
      py::arg("n_docs") = 1000, py::arg("seed") = 0, py::arg("signal_strength") = 0.9, py::arg("hashtag_rate") = 0.5,
      py::arg("url_rate") = 0.2);

  m.def("precision_at_k", &precision_at_k, py::arg("relevance"), py::arg("k"));
  m.def("avg_precision_at_k", &avg_precision_at_k, py::arg("relevance"), py::arg("k"));

  m.def(
      "evaluate",
      [](const std::vector<std::string>& lines, const std::map<std::string, std::string>& settings) {
        auto cfg = make_config(settings);
        auto corpus = parse_records(lines);
        py::gil_scoped_release release;
        return to_json(evaluate_corpus(corpus, cfg.pipeline, cfg.folds, cfg.stratified)).dump();
      },
      py::arg("records"), py::arg("settings"));

  m.def(
      "analyze",
      [](const std::vector<std::string>& report_lines, std::optional<std::string> victim, bool include_ungated) {
        std::vector<ReportRecord> reports;
        for (const auto& l : report_lines) reports.push_back(report_from_json(nlohmann::json::parse(l)));
        AnalysisFilter f;
        f.victim = victim ? std::optional<Victim>(parse_victim(*victim)) : std::nullopt;
        f.require_gated = !include_ungated;
        return to_json(analyze(reports, f)).dump();
      },
      py::arg("reports"), py::arg("victim"), py::arg("include_ungated"));

  m.def(
      "run_cli", [](const std::vector<std::string>& args) {
        py::gil_scoped_release release;
        std::vector<std::string> argv{"reptrack"};
        argv.insert(argv.end(), args.begin(), args.end());
        std::vector<char*> ptrs;
        for (auto& a : argv) ptrs.push_back(a.data());
        return run_cli(static_cast<int>(ptrs.size()), ptrs.data());
      },
      py::arg("args"));

  py::class_<PipelineModel>(m, "Model")
      .def_static(
          "train",
          [](const std::vector<std::string>& lines, const std::map<std::string, std::string>& settings) {
            auto cfg = make_config(settings);
            auto corpus = parse_records(lines);
            py::gil_scoped_release release;
            return train_pipeline(corpus, cfg.pipeline);
          },
          py::arg("records"), py::arg("settings"))
      .def_static("load", [](const std::string& path) { return load_model(path); }, py::arg("path"))
      .def_static(
          "from_bytes", [](const py::bytes& b) { return deserialize_model(std::string(b)); }, py::arg("data"))
      .def("save", [](const PipelineModel& self, const std::string& path) { save_model(self, path); }, py::arg("path"))
      .def("to_bytes", [](const PipelineModel& self) { return py::bytes(serialize_model(self)); })
      .def_property("threshold", &PipelineModel::threshold, &PipelineModel::set_threshold)
      .def_property_readonly("n_features", [](const PipelineModel& self) { return self.vocabulary().size(); })
      .def(
          "score",
          [](const PipelineModel& self, const std::vector<std::string>& lines, std::size_t threads) {
            auto docs = parse_docs(lines);
            std::vector<ReportRecord> records;
            {
              py::gil_scoped_release release;
              records = score_all(self, docs, threads);
            }
            std::vector<std::string> out;
            for (const auto& r : records) out.push_back(to_json(r).dump());
            return out;
          },
          py::arg("docs"), py::arg("threads") = 1)
      .def(
          "tag",
          [](const PipelineModel& self, const std::string& text) {
            std::vector<std::pair<std::size_t, std::size_t>> out;
            for (const auto& r : self.tag(plain(text))) out.emplace_back(r.start, r.end);
            return out;
          },
          py::arg("text"), "Perpetrator token ranges [start, end).");
}
