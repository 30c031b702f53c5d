#include "doctest.h"
#include "reptrack/config.hpp"

using namespace reptrack;

TEST_CASE("config: defaults mirror the library defaults") {
  RunConfig c;
  CHECK(c.pipeline.features == FeatureConfig{});
  CHECK(c.pipeline.threshold == 0.7);
  CHECK(c.folds == 5);
  auto text = format_config(c);
  for (const auto& key : config_keys()) CHECK(text.find(key + " = ") != std::string::npos);
}

TEST_CASE("config: parse overrides, comments and blank lines") {
  auto c = parse_config(
      "# comment\n"
      "\n"
      "features.ngram_max = 3   # trailing comment\n"
      "features.weighting=bow\n"
      "features.sublinear_tf = false\n"
      "forest.n_trees = 7\n"
      "boost.learning_rate = 0.25\n"
      "crf.sigma = 2.5\n"
      "threshold = 0.8\n"
      "seed = 18446744073709551615\n"
      "folds = 10\n"
      "stratified = true\n"
      "threshold = 0.75\n");
  CHECK(c.pipeline.features.ngram_max == 3);
  CHECK(c.pipeline.features.weighting == Weighting::kBow);
  CHECK_FALSE(c.pipeline.features.sublinear_tf);
  CHECK(c.pipeline.voting.forest.n_trees == 7);
  CHECK(c.pipeline.voting.boost.learning_rate == 0.25);
  CHECK(c.pipeline.crf.sigma == 2.5);
  CHECK(c.pipeline.threshold == 0.75);
  CHECK(c.pipeline.seed == 18446744073709551615ULL);
  CHECK(c.folds == 10);
  CHECK(c.stratified);
}

TEST_CASE("config: format then parse reproduces every value") {
  RunConfig c;
  c.pipeline.features.min_df_abs = 4;
  c.pipeline.features.max_df_ratio = 0.3;
  c.pipeline.voting.linear.l2 = 1.0 / 3;
  c.pipeline.crf.gradient_tolerance = 1e-7;
  c.pipeline.seed = 99;
  auto back = parse_config(format_config(c));
  CHECK(format_config(back) == format_config(c));
  CHECK(back.pipeline.voting.linear.l2 == c.pipeline.voting.linear.l2);
  CHECK(back.pipeline.features == c.pipeline.features);
}

TEST_CASE("config: errors carry the line number") {
  auto message = [](const char* text) {
    try {
      parse_config(text);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  CHECK(message("seed = 1\nbogus.key = 3\n") == "config line 2: unknown config key 'bogus.key'");
  CHECK(message("folds = five\n").find("config line 1: invalid value 'five'") == 0);
  CHECK(message("threshold\n") == "config line 1: expected key = value");
  CHECK(message("stratified = maybe\n").find("expected true or false") != std::string::npos);
  CHECK(message("features.weighting = counts\n").find("features.weighting") != std::string::npos);
  CHECK(message("seed = -1\n").find("invalid value") != std::string::npos);
  CHECK_THROWS_AS(load_config("/nonexistent/cfg.txt"), ConfigError);
}
