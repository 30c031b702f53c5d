#pragma once

#include <vector>

#include "reptrack/pipeline.hpp"
#include "reptrack/synth.hpp"

namespace fixture {

/// Lighter learners so the cascade trains in about a second.
inline reptrack::PipelineConfig small_config() {
  reptrack::PipelineConfig cfg;
  cfg.seed = 42;
  cfg.voting.forest.n_trees = 15;
  cfg.voting.boost.rounds = 15;
  cfg.crf.max_iter = 60;
  return cfg;
}

inline const std::vector<reptrack::CorpusRecord>& small_corpus() {
  static const auto corpus = [] {
    reptrack::SynthConfig sc;
    sc.n_docs = 300;
    sc.seed = 5;
    return reptrack::generate(sc);
  }();
  return corpus;
}

/// Unseen documents from the same generator.
inline const std::vector<reptrack::Document>& holdout_docs() {
  static const auto docs = [] {
    reptrack::SynthConfig sc;
    sc.n_docs = 100;
    sc.seed = 6;
    std::vector<reptrack::Document> out;
    for (auto& r : reptrack::generate(sc)) out.push_back(r.doc);
    return out;
  }();
  return docs;
}

inline const reptrack::PipelineModel& small_model() {
  static const auto model = reptrack::train_pipeline(small_corpus(), small_config());
  return model;
}

}  // namespace fixture
