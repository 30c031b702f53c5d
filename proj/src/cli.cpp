#include "reptrack/cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <json.hpp>

#include "reptrack/config.hpp"
#include "reptrack/error.hpp"
#include "reptrack/model_io.hpp"
#include "reptrack/parallel.hpp"
#include "reptrack/srl.hpp"
#include "reptrack/synth.hpp"

namespace reptrack {
namespace {

struct Options {
  std::string config;
  std::vector<std::string> settings;
  std::size_t threads = 0;
  std::uint64_t seed = 0;
  double threshold = 0.7;
  std::size_t folds = 5;
  bool stratified = false;
  std::string in = "-";
  std::string out = "-";
  std::string model;
  std::string json;
  bool dedup = false;
  bool passed_only = false;
  std::string victim = "SLF";
  bool include_ungated = false;
  std::size_t n_docs = 1000;
  double signal_strength = 0.9;
  double hashtag_rate = 0.5;
  double url_rate = 0.2;
};

struct Streams {
  std::istream& in;
  std::ostream& out;
  std::ostream& err;
};

std::vector<CorpusRecord> read_input(const std::string& path, Streams io) {
  if (path == "-") return read_corpus(io.in, CorpusFormat::kJsonl);
  return read_corpus(std::filesystem::path(path), format_for(path));
}

void write_output(const std::string& path, Streams io, const std::function<void(std::ostream&)>& body) {
  if (path == "-") {
    body(io.out);
    io.out.flush();
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError("cannot open '" + path + "' for writing");
  body(f);
  if (!f) throw DataError("failed writing '" + path + "'");
}

std::vector<ReportRecord> read_reports(const std::string& path, Streams io) {
  std::ifstream file;
  std::istream* in = &io.in;
  if (path != "-") {
    file.open(path, std::ios::binary);
    if (!file) throw DataError("cannot open report file '" + path + "'");
    in = &file;
  }
  std::vector<ReportRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(*in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(report_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(std::string("invalid JSON: ") + e.what(), line_no);
    } catch (const DataError& e) {
      throw DataError(e.what(), line_no);
    }
  }
  return out;
}

/// Defaults, then the config file, then --set entries, then explicit flags.
RunConfig resolve_config(const Options& o, const CLI::App& sub) {
  RunConfig cfg;
  std::string path = o.config;
  if (path.empty())
    if (const char* env = std::getenv(kConfigEnvVar); env && *env) path = env;
  if (!path.empty()) cfg = load_config(path, cfg);
  for (const auto& s : o.settings) {
    auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
    apply_setting(cfg, s.substr(0, eq), s.substr(eq + 1));
  }
  auto given = [&](const char* name) { return sub.get_option_no_throw(name) && sub.count(name) > 0; };
  if (given("--threads")) cfg.pipeline.threads = o.threads;
  if (given("--seed")) cfg.pipeline.seed = o.seed;
  if (given("--threshold")) cfg.pipeline.threshold = o.threshold;
  if (given("--folds")) cfg.folds = o.folds;
  if (given("--stratified")) cfg.stratified = o.stratified;
  cfg.pipeline.threads = resolve_threads(cfg.pipeline.threads);
  return cfg;
}

nlohmann::json with_field(const CorpusRecord& r, const char* key, nlohmann::json value) {
  auto j = nlohmann::json::parse(to_jsonl(r));
  j[key] = std::move(value);
  return j;
}

void cmd_clean(const Options& o, const RunConfig& cfg, Streams io) {
  auto records = read_input(o.in, io);
  if (o.dedup) records = deduplicate(records);
  std::vector<TokenizedDocument> docs(records.size());
  parallel_for(records.size(), cfg.pipeline.threads, [&](std::size_t i) { docs[i] = prepare(records[i].doc); });
  write_output(o.out, io, [&](std::ostream& os) {
    for (std::size_t i = 0; i < records.size(); ++i) {
      std::vector<std::string> pos;
      for (auto p : docs[i].pos) pos.emplace_back(to_string(p));
      nlohmann::json c{{"text", clean(records[i].doc.text)}, {"tokens", docs[i].tokens}, {"pos", pos}};
      os << with_field(records[i], "clean", std::move(c)).dump() << '\n';
    }
  });
}

void cmd_filter(const Options& o, const RunConfig& cfg, Streams io) {
  auto records = read_input(o.in, io);
  std::vector<std::vector<PatternTuple>> tuples(records.size());
  parallel_for(records.size(), cfg.pipeline.threads,
               [&](std::size_t i) { tuples[i] = extract_tuples(prepare(records[i].doc)); });
  write_output(o.out, io, [&](std::ostream& os) {
    for (std::size_t i = 0; i < records.size(); ++i) {
      const bool passed = !tuples[i].empty();
      if (o.passed_only && !passed) continue;
      nlohmann::json list = nlohmann::json::array();
      for (const auto& t : tuples[i])
        list.push_back({t.agent.start, t.agent.end, t.verb, t.detail.start, t.detail.end});
      os << with_field(records[i], "filter", {{"passed", passed}, {"tuples", list}}).dump() << '\n';
    }
  });
}

void cmd_synth(const Options& o, const RunConfig& cfg, Streams io) {
  SynthConfig sc;
  sc.n_docs = o.n_docs;
  sc.seed = cfg.pipeline.seed;
  sc.signal_strength = o.signal_strength;
  sc.hashtag_rate = o.hashtag_rate;
  sc.url_rate = o.url_rate;
  auto corpus = generate(sc);
  write_output(o.out, io, [&](std::ostream& os) { write_corpus(os, corpus, CorpusFormat::kJsonl); });
}

void cmd_train(const Options& o, const RunConfig& cfg, Streams io) {
  auto corpus = read_input(o.in, io);
  auto model = train_pipeline(corpus, cfg.pipeline);
  save_model(model, o.out);
  io.out << "trained on " << corpus.size() << " records, " << model.vocabulary().size() << " features; wrote "
         << o.out << '\n';
}

void cmd_evaluate(const Options& o, const RunConfig& cfg, Streams io) {
  auto corpus = read_input(o.in, io);
  auto ev = evaluate_corpus(corpus, cfg.pipeline, cfg.folds, cfg.stratified);
  write_output(o.out, io, [&](std::ostream& os) { os << format_evaluation(ev); });
  if (!o.json.empty()) write_output(o.json, io, [&](std::ostream& os) { os << to_json(ev).dump(2) << '\n'; });
}

PipelineModel load_for_inference(const Options& o, const RunConfig& cfg, const CLI::App& sub) {
  auto model = load_model(o.model);
  if (sub.get_option_no_throw("--threshold") && sub.count("--threshold") > 0)
    model.set_threshold(cfg.pipeline.threshold);
  return model;
}

void cmd_score(const Options& o, const RunConfig& cfg, Streams io, const CLI::App& sub) {
  auto model = load_for_inference(o, cfg, sub);
  auto records = read_input(o.in, io);
  std::vector<Document> docs;
  docs.reserve(records.size());
  for (auto& r : records) docs.push_back(std::move(r.doc));
  auto reports = score_all(model, docs, cfg.pipeline.threads);
  write_output(o.out, io, [&](std::ostream& os) {
    for (const auto& r : reports) os << to_json(r).dump() << '\n';
  });
}

void cmd_tag(const Options& o, const RunConfig& cfg, Streams io, const CLI::App& sub) {
  auto model = load_for_inference(o, cfg, sub);
  auto records = read_input(o.in, io);
  std::vector<nlohmann::json> rows(records.size());
  parallel_for(records.size(), cfg.pipeline.threads, [&](std::size_t i) {
    const auto& doc = records[i].doc;
    auto tdoc = prepare(doc);
    auto spans = extract_spans(decode_constrained(model.tagger(), model.tagger().extract_features(tdoc)));
    nlohmann::json ranges = nlohmann::json::array(), texts = nlohmann::json::array();
    for (const auto& s : spans) {
      ranges.push_back({s.start, s.end});
      const std::size_t b = tdoc.raw_char_spans[s.start].start, e = tdoc.raw_char_spans[s.end - 1].end;
      texts.push_back(doc.text.substr(b, e - b));
    }
    rows[i] = {{"id", doc.id}, {"spans", ranges}, {"texts", texts}};
  });
  write_output(o.out, io, [&](std::ostream& os) {
    for (const auto& r : rows) os << r.dump() << '\n';
  });
}

void cmd_report(const Options& o, Streams io) {
  AnalysisFilter filter;
  if (o.victim == "any") filter.victim.reset();
  else filter.victim = parse_victim(o.victim);
  filter.require_gated = !o.include_ungated;
  auto summary = analyze(read_reports(o.in, io), filter);
  write_output(o.out, io, [&](std::ostream& os) { os << format_summary(summary); });
  if (!o.json.empty()) write_output(o.json, io, [&](std::ostream& os) { os << to_json(summary).dump(2) << '\n'; });
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  Streams io{in, out, err};
  Options o;
  CLI::App app{"Detect, characterize and summarize first-hand violence reports in social media posts."};
  app.name("reptrack");
  app.require_subcommand(1);

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, std::string("key=value config file (default: $") + kConfigEnvVar + ")");
    sub->add_option("--set", o.settings, "override one config key, as key=value (repeatable)");
    sub->add_option("--threads", o.threads, "worker threads, 0 for one per logical core");
  };
  auto input = [&](CLI::App* sub, const char* what) { sub->add_option("--in", o.in, what)->capture_default_str(); };
  auto output = [&](CLI::App* sub) { sub->add_option("--out", o.out, "output path, '-' for stdout")->capture_default_str(); };

  auto* clean_cmd = app.add_subcommand("clean", "clean and tokenize documents (JSONL in, JSONL out)");
  input(clean_cmd, "documents (.jsonl or .csv, '-' for stdin)");
  output(clean_cmd);
  clean_cmd->add_flag("--dedup", o.dedup, "drop retweets and duplicates first");

  auto* filter_cmd = app.add_subcommand("filter", "attach agent/verb/detail tuples and the pass flag");
  input(filter_cmd, "documents (.jsonl or .csv, '-' for stdin)");
  output(filter_cmd);
  filter_cmd->add_flag("--passed-only", o.passed_only, "emit only documents that pass");

  auto* synth_cmd = app.add_subcommand("synth", "write a synthetic annotated corpus");
  output(synth_cmd);
  synth_cmd->add_option("--n", o.n_docs, "number of documents")->capture_default_str();
  synth_cmd->add_option("--seed", o.seed, "random seed");
  synth_cmd->add_option("--signal-strength", o.signal_strength, "probability a slot carries its class phrase")
      ->capture_default_str();
  synth_cmd->add_option("--hashtag-rate", o.hashtag_rate, "probability of a trailing hashtag")->capture_default_str();
  synth_cmd->add_option("--url-rate", o.url_rate, "probability of a trailing link")->capture_default_str();

  auto* train_cmd = app.add_subcommand("train", "train the full cascade and write a model file");
  input(train_cmd, "annotated corpus (.jsonl or .csv)");
  train_cmd->add_option("--out", o.out, "model file")->required();
  train_cmd->add_option("--seed", o.seed, "random seed");
  train_cmd->add_option("--threshold", o.threshold, "gate threshold stored in the model");

  auto* eval_cmd = app.add_subcommand("evaluate", "k-fold cross-validation tables for every task");
  input(eval_cmd, "annotated corpus (.jsonl or .csv)");
  output(eval_cmd);
  eval_cmd->add_option("--folds", o.folds, "number of folds");
  eval_cmd->add_option("--seed", o.seed, "random seed");
  eval_cmd->add_flag("--stratified", o.stratified, "stratify folds by the detection label");
  eval_cmd->add_option("--json", o.json, "also write the results as JSON to this path");

  auto* score_cmd = app.add_subcommand("score", "run the cascade and emit report records");
  score_cmd->add_option("--model", o.model, "model file")->required();
  input(score_cmd, "documents (.jsonl or .csv)");
  output(score_cmd);
  score_cmd->add_option("--threshold", o.threshold, "override the model's gate threshold");

  auto* tag_cmd = app.add_subcommand("tag", "emit perpetrator spans only");
  tag_cmd->add_option("--model", o.model, "model file")->required();
  input(tag_cmd, "documents (.jsonl or .csv)");
  output(tag_cmd);

  auto* report_cmd = app.add_subcommand("report", "summarize report records into distribution tables");
  input(report_cmd, "report records from `score`");
  output(report_cmd);
  report_cmd->add_option("--json", o.json, "also write the summary as JSON to this path");
  report_cmd->add_option("--victim", o.victim, "victim filter: SLF, nSLF or any")
      ->check(CLI::IsMember({"SLF", "nSLF", "any"}))
      ->capture_default_str();
  report_cmd->add_flag("--include-ungated", o.include_ungated, "count detected reports below the gate");

  for (auto* sub : {clean_cmd, filter_cmd, synth_cmd, train_cmd, eval_cmd, score_cmd, tag_cmd, report_cmd})
    common(sub);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  const CLI::App* sub = app.get_subcommands().front();
  try {
    RunConfig cfg = resolve_config(o, *sub);
    cfg.pipeline.validate();
    if (sub == clean_cmd) cmd_clean(o, cfg, io);
    else if (sub == filter_cmd) cmd_filter(o, cfg, io);
    else if (sub == synth_cmd) cmd_synth(o, cfg, io);
    else if (sub == train_cmd) cmd_train(o, cfg, io);
    else if (sub == eval_cmd) cmd_evaluate(o, cfg, io);
    else if (sub == score_cmd) cmd_score(o, cfg, io, *sub);
    else if (sub == tag_cmd) cmd_tag(o, cfg, io, *sub);
    else cmd_report(o, io);
  } catch (const ConfigError& e) {
    err << "reptrack: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "reptrack: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "reptrack: " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cin, std::cout, std::cerr);
}

}  // namespace reptrack
