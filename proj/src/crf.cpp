#include "reptrack/crf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "reptrack/error.hpp"
#include "reptrack/parallel.hpp"

namespace reptrack {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::array<Tag, kNumTags> kTags{Tag::kO, Tag::kB, Tag::kI, Tag::kE};
// Gradient partial sums are reduced in this many fixed chunks so the result
// does not depend on the worker count.
constexpr std::size_t kGradientChunks = 8;

std::size_t ti(Tag t) { return static_cast<std::size_t>(t); }

double log_sum_exp(const double* v, std::size_t n) {
  double mx = kNegInf;
  for (std::size_t i = 0; i < n; ++i) mx = std::max(mx, v[i]);
  if (mx == kNegInf) return kNegInf;
  double s = 0;
  for (std::size_t i = 0; i < n; ++i) s += std::exp(v[i] - mx);
  return mx + std::log(s);
}

using Lattice = std::vector<std::array<double, kNumTags>>;

Lattice emissions(const CRFModel& m, const SequenceFeatures& x) {
  Lattice e(x.size());
  const auto& th = m.params();
  for (std::size_t i = 0; i < x.size(); ++i) {
    e[i].fill(0.0);
    for (auto f : x[i])
      for (std::size_t t = 0; t < kNumTags; ++t) e[i][t] += th[f * kNumTags + t];
  }
  return e;
}

struct ForwardBackward {
  Lattice alpha, beta;
  double log_z = 0;
};

ForwardBackward forward_backward(const CRFModel& m, const Lattice& e) {
  const std::size_t n = e.size();
  ForwardBackward fb;
  if (n == 0) return fb;
  fb.alpha.resize(n);
  fb.beta.resize(n);
  double buf[kNumTags];
  for (std::size_t t = 0; t < kNumTags; ++t) fb.alpha[0][t] = m.start(kTags[t]) + e[0][t];
  for (std::size_t i = 1; i < n; ++i)
    for (std::size_t t = 0; t < kNumTags; ++t) {
      for (std::size_t s = 0; s < kNumTags; ++s) buf[s] = fb.alpha[i - 1][s] + m.transition(kTags[s], kTags[t]);
      fb.alpha[i][t] = log_sum_exp(buf, kNumTags) + e[i][t];
    }
  for (std::size_t t = 0; t < kNumTags; ++t) fb.beta[n - 1][t] = m.end(kTags[t]);
  for (std::size_t i = n - 1; i-- > 0;)
    for (std::size_t s = 0; s < kNumTags; ++s) {
      for (std::size_t t = 0; t < kNumTags; ++t)
        buf[t] = m.transition(kTags[s], kTags[t]) + e[i + 1][t] + fb.beta[i + 1][t];
      fb.beta[i][s] = log_sum_exp(buf, kNumTags);
    }
  for (std::size_t t = 0; t < kNumTags; ++t) buf[t] = fb.alpha[n - 1][t] + fb.beta[n - 1][t];
  fb.log_z = log_sum_exp(buf, kNumTags);
  return fb;
}

// Adds empirical minus expected counts for one example to `g`; returns log p(y|x).
double accumulate(const CRFModel& m, const CrfExample& ex, std::vector<double>& g) {
  const auto& x = ex.features;
  const auto& y = ex.tags;
  const std::size_t n = x.size();
  if (n == 0) return 0.0;
  auto e = emissions(m, x);
  auto fb = forward_backward(m, e);
  const std::size_t to = m.trans_offset();
  const std::size_t so = to + kNumTags * kNumTags;
  const std::size_t eo = so + kNumTags;

  double score = m.start(y[0]) + m.end(y[n - 1]);
  g[so + ti(y[0])] += 1;
  g[eo + ti(y[n - 1])] += 1;
  for (std::size_t i = 0; i < n; ++i) {
    score += e[i][ti(y[i])];
    for (auto f : x[i]) g[f * kNumTags + ti(y[i])] += 1;
    if (i > 0) {
      score += m.transition(y[i - 1], y[i]);
      g[to + ti(y[i - 1]) * kNumTags + ti(y[i])] += 1;
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    std::array<double, kNumTags> p;
    for (std::size_t t = 0; t < kNumTags; ++t) p[t] = std::exp(fb.alpha[i][t] + fb.beta[i][t] - fb.log_z);
    for (auto f : x[i])
      for (std::size_t t = 0; t < kNumTags; ++t) g[f * kNumTags + t] -= p[t];
    if (i == 0)
      for (std::size_t t = 0; t < kNumTags; ++t) g[so + t] -= p[t];
    if (i == n - 1)
      for (std::size_t t = 0; t < kNumTags; ++t) g[eo + t] -= p[t];
    if (i > 0)
      for (std::size_t s = 0; s < kNumTags; ++s)
        for (std::size_t t = 0; t < kNumTags; ++t)
          g[to + s * kNumTags + t] -= std::exp(fb.alpha[i - 1][s] + m.transition(kTags[s], kTags[t]) + e[i][t] +
                                               fb.beta[i][t] - fb.log_z);
  }
  return score - fb.log_z;
}

void check_example(const CrfExample& ex, std::size_t n_features) {
  if (ex.features.size() != ex.tags.size()) throw std::invalid_argument("CRF example: features/tags length mismatch");
  for (const auto& pos : ex.features)
    for (auto f : pos)
      if (f >= n_features) throw std::invalid_argument("CRF example: feature id out of range");
}

// Code-point prefix or suffix of up to `k` code points.
std::string affix(const std::string& w, std::size_t k, bool prefix) {
  std::vector<std::size_t> starts;
  for (std::size_t i = 0; i < w.size(); ++i)
    if ((static_cast<unsigned char>(w[i]) & 0xC0) != 0x80) starts.push_back(i);
  if (starts.size() <= k) return w;
  return prefix ? w.substr(0, starts[k]) : w.substr(starts[starts.size() - k]);
}

template <bool Constrained>
TagSequence viterbi(const CRFModel& m, const SequenceFeatures& x) {
  const std::size_t n = x.size();
  if (n == 0) return {};
  auto e = emissions(m, x);
  auto allowed = [](double v, bool ok) { return Constrained && !ok ? kNegInf : v; };
  Lattice delta(n);
  std::vector<std::array<std::uint8_t, kNumTags>> back(n);
  for (std::size_t t = 0; t < kNumTags; ++t)
    delta[0][t] = allowed(m.start(kTags[t]) + e[0][t], start_allowed(kTags[t]));
  for (std::size_t i = 1; i < n; ++i)
    for (std::size_t t = 0; t < kNumTags; ++t) {
      double best = kNegInf;
      std::uint8_t arg = 0;
      for (std::size_t s = 0; s < kNumTags; ++s) {
        double v = allowed(delta[i - 1][s] + m.transition(kTags[s], kTags[t]),
                           transition_allowed(kTags[s], kTags[t]));
        if (v > best) {
          best = v;
          arg = static_cast<std::uint8_t>(s);
        }
      }
      delta[i][t] = best + e[i][t];
      back[i][t] = arg;
    }
  double best = kNegInf;
  std::size_t last = 0;
  for (std::size_t t = 0; t < kNumTags; ++t) {
    double v = allowed(delta[n - 1][t] + m.end(kTags[t]), end_allowed(kTags[t]));
    if (v > best) {
      best = v;
      last = t;
    }
  }
  TagSequence out(n);
  out[n - 1] = kTags[last];
  for (std::size_t i = n - 1; i > 0; --i) out[i - 1] = kTags[back[i][ti(out[i])]];
  return out;
}

double norm2(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return s;
}

}  // namespace

std::string_view to_string(Tag t) {
  static constexpr std::array<std::string_view, kNumTags> names{"O", "B", "I", "E"};
  return names[ti(t)];
}

TagSequence encode_span(std::optional<Range> span, std::size_t n) {
  TagSequence tags(n, Tag::kO);
  if (!span) return tags;
  if (span->start >= span->end || span->end > n)
    throw std::invalid_argument("span [" + std::to_string(span->start) + "," + std::to_string(span->end) +
                                ") invalid for " + std::to_string(n) + " tokens");
  tags[span->start] = Tag::kB;
  if (span->size() == 1) return tags;
  for (std::size_t i = span->start + 1; i + 1 < span->end; ++i) tags[i] = Tag::kI;
  tags[span->end - 1] = Tag::kE;
  return tags;
}

std::vector<Range> extract_spans(const TagSequence& tags) {
  std::vector<Range> spans;
  for (std::size_t i = 0; i < tags.size();) {
    if (tags[i] != Tag::kB) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < tags.size() && tags[j] == Tag::kI) ++j;
    if (j < tags.size() && tags[j] == Tag::kE) ++j;
    spans.push_back({i, j});
    i = j;
  }
  return spans;
}

std::vector<std::vector<std::string>> feature_strings(const TokenizedDocument& doc) {
  const std::size_t n = doc.tokens.size();
  auto pos = [&](std::size_t i) -> std::string {
    return i < doc.pos.size() ? std::string(to_string(doc.pos[i])) : std::string(to_string(PosTag::kOther));
  };
  std::vector<std::vector<std::string>> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& w = doc.tokens[i];
    auto& f = out[i];
    f.push_back("w=" + w);
    f.push_back("w-1=" + (i == 0 ? std::string("BOS") : doc.tokens[i - 1]));
    f.push_back("w+1=" + (i + 1 == n ? std::string("EOS") : doc.tokens[i + 1]));
    f.push_back("p=" + pos(i));
    f.push_back("p-1=" + (i == 0 ? std::string("BOS") : pos(i - 1)));
    f.push_back("p+1=" + (i + 1 == n ? std::string("EOS") : pos(i + 1)));
    for (std::size_t k = 1; k <= 3; ++k) f.push_back("pre" + std::to_string(k) + "=" + affix(w, k, true));
    for (std::size_t k = 1; k <= 3; ++k) f.push_back("suf" + std::to_string(k) + "=" + affix(w, k, false));
    f.push_back("bias");
  }
  return out;
}

CRFModel::CRFModel(std::size_t n_features)
    : n_features_(n_features), theta_(param_count(n_features), 0.0) {}

CRFModel::CRFModel(std::vector<std::string> feature_names)
    : n_features_(feature_names.size()), names_(std::move(feature_names)), theta_(param_count(n_features_), 0.0) {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (!index_.emplace(names_[i], static_cast<std::uint32_t>(i)).second)
      throw std::invalid_argument("duplicate CRF feature '" + names_[i] + "'");
}

std::optional<std::uint32_t> CRFModel::feature_id(std::string_view name) const {
  auto it = index_.find(name);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

SequenceFeatures CRFModel::extract_features(const TokenizedDocument& doc) const {
  auto strings = feature_strings(doc);
  SequenceFeatures out(strings.size());
  for (std::size_t i = 0; i < strings.size(); ++i) {
    for (const auto& s : strings[i])
      if (auto id = feature_id(s)) out[i].push_back(*id);
    std::sort(out[i].begin(), out[i].end());
    out[i].erase(std::unique(out[i].begin(), out[i].end()), out[i].end());
  }
  return out;
}

void CRFModel::save(Writer& w) const {
  w.word("crf").u(n_features_).d(sigma_).endl();
  for (const auto& n : names_) w.str(n).endl();
  std::size_t nnz = 0;
  for (std::size_t k = 0; k < trans_offset(); ++k) nnz += theta_[k] != 0.0;
  w.word("emission").u(nnz).endl();
  for (std::size_t k = 0; k < trans_offset(); ++k)
    if (theta_[k] != 0.0) w.u(k / kNumTags).u(k % kNumTags).d(theta_[k]).endl();
  w.word("transition");
  for (std::size_t k = trans_offset(); k < trans_offset() + kNumTags * kNumTags; ++k) w.d(theta_[k]);
  w.endl().word("start");
  for (std::size_t t = 0; t < kNumTags; ++t) w.d(theta_[trans_offset() + kNumTags * kNumTags + t]);
  w.endl().word("end");
  for (std::size_t t = 0; t < kNumTags; ++t) w.d(theta_[trans_offset() + kNumTags * kNumTags + kNumTags + t]);
  w.endl();
}

CRFModel CRFModel::load(Reader& r) {
  auto corrupt = [](const std::string& what) {
    return ModelFileError(ModelFileError::Kind::kCorrupt, "corrupt model file: " + what);
  };
  r.expect("crf");
  std::size_t n = r.count();
  double sigma = r.d();
  std::vector<std::string> names;
  names.reserve(n);
  for (std::size_t i = 0; i < n; ++i) names.push_back(r.str());
  CRFModel m;
  try {
    m = CRFModel(std::move(names));
  } catch (const std::invalid_argument& e) {
    throw corrupt(e.what());
  }
  m.sigma_ = sigma;
  r.expect("emission");
  std::size_t nnz = r.count(m.trans_offset());
  for (std::size_t k = 0; k < nnz; ++k) {
    std::size_t f = r.u(), t = r.u();
    if (f >= n || t >= kNumTags) throw corrupt("CRF emission index out of range");
    m.theta_[f * kNumTags + t] = r.d();
  }
  r.expect("transition");
  for (std::size_t k = 0; k < kNumTags * kNumTags; ++k) m.theta_[m.trans_offset() + k] = r.d();
  r.expect("start");
  for (std::size_t t = 0; t < kNumTags; ++t) m.theta_[m.trans_offset() + kNumTags * kNumTags + t] = r.d();
  r.expect("end");
  for (std::size_t t = 0; t < kNumTags; ++t) m.theta_[m.trans_offset() + kNumTags * kNumTags + kNumTags + t] = r.d();
  for (double v : m.theta_)
    if (!std::isfinite(v)) throw corrupt("non-finite CRF weight");
  return m;
}

double sequence_score(const CRFModel& model, const SequenceFeatures& x, const TagSequence& y) {
  if (x.size() != y.size()) throw std::invalid_argument("features/tags length mismatch");
  if (x.empty()) return 0.0;
  auto e = emissions(model, x);
  double s = model.start(y.front()) + model.end(y.back());
  for (std::size_t i = 0; i < x.size(); ++i) {
    s += e[i][ti(y[i])];
    if (i > 0) s += model.transition(y[i - 1], y[i]);
  }
  return s;
}

double log_partition(const CRFModel& model, const SequenceFeatures& x) {
  return forward_backward(model, emissions(model, x)).log_z;
}

Marginals marginals(const CRFModel& model, const SequenceFeatures& x) {
  auto fb = forward_backward(model, emissions(model, x));
  Marginals out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t t = 0; t < kNumTags; ++t) out[i][t] = std::exp(fb.alpha[i][t] + fb.beta[i][t] - fb.log_z);
  return out;
}

bool transition_allowed(Tag from, Tag to) {
  switch (from) {
    case Tag::kO: return to == Tag::kO || to == Tag::kB;
    case Tag::kB: return to == Tag::kI || to == Tag::kE || to == Tag::kO;
    case Tag::kI: return to == Tag::kI || to == Tag::kE;
    case Tag::kE: return to == Tag::kO;
  }
  return false;
}

bool start_allowed(Tag t) { return t == Tag::kO || t == Tag::kB; }
bool end_allowed(Tag t) { return t != Tag::kI; }

TagSequence decode(const CRFModel& model, const SequenceFeatures& x) { return viterbi<false>(model, x); }
TagSequence decode_constrained(const CRFModel& model, const SequenceFeatures& x) { return viterbi<true>(model, x); }

double crf_objective(const CRFModel& model, const std::vector<CrfExample>& data, double sigma,
                     std::vector<double>* gradient, std::size_t threads) {
  if (!(sigma > 0)) throw std::invalid_argument("CRF sigma must be positive");
  const std::size_t p = model.params().size();
  const std::size_t chunks = std::min(kGradientChunks, std::max<std::size_t>(1, data.size()));
  std::vector<std::vector<double>> partial(chunks);
  std::vector<double> loglik(chunks, 0.0);
  parallel_for(chunks, threads, [&](std::size_t c) {
    std::vector<double> g(p, 0.0);
    const std::size_t lo = c * data.size() / chunks, hi = (c + 1) * data.size() / chunks;
    for (std::size_t i = lo; i < hi; ++i) loglik[c] += accumulate(model, data[i], g);
    partial[c] = std::move(g);
  });
  const auto& th = model.params();
  const double inv_var = 1.0 / (sigma * sigma);
  double value = -0.5 * norm2(th) * inv_var;
  for (double l : loglik) value += l;
  if (gradient) {
    gradient->assign(p, 0.0);
    for (const auto& g : partial)
      for (std::size_t k = 0; k < p; ++k) (*gradient)[k] += g[k];
    for (std::size_t k = 0; k < p; ++k) (*gradient)[k] -= th[k] * inv_var;
  }
  return value;
}

CRFModel train_crf(CRFModel model, const std::vector<CrfExample>& data, const CrfConfig& cfg,
                   CrfTrainingTrace* trace) {
  if (data.empty()) throw std::invalid_argument("CRF training needs at least one sequence");
  if (!(cfg.sigma > 0)) throw std::invalid_argument("CRF sigma must be positive");
  for (const auto& ex : data) check_example(ex, model.n_features());
  model.set_sigma(cfg.sigma);

  constexpr double kArmijo = 1e-4;
  constexpr int kMaxHalvings = 60;
  std::vector<double> grad, trial_grad;
  double value = crf_objective(model, data, cfg.sigma, &grad, cfg.threads);
  CrfTrainingTrace local;
  local.objective.push_back(value);
  std::vector<double> prev_theta, prev_grad;
  double step = 0;
  for (std::size_t it = 0; it < cfg.max_iter; ++it) {
    const double gg = norm2(grad);
    if (std::sqrt(gg) < cfg.gradient_tolerance) break;
    if (prev_theta.empty()) {
      step = 1.0 / std::sqrt(gg);
    } else {
      // Barzilai-Borwein step for the negated (convex) objective.
      double ss = 0, sy = 0;
      const auto& th = model.params();
      for (std::size_t k = 0; k < th.size(); ++k) {
        double s = th[k] - prev_theta[k];
        ss += s * s;
        sy -= s * (grad[k] - prev_grad[k]);
      }
      if (sy > 0 && ss > 0) step = std::clamp(ss / sy, 1e-10, 1e10);
    }
    CRFModel trial = model;
    bool accepted = false;
    double trial_value = value;
    for (int h = 0; h < kMaxHalvings; ++h) {
      auto& tp = trial.params();
      const auto& th = model.params();
      for (std::size_t k = 0; k < th.size(); ++k) tp[k] = th[k] + step * grad[k];
      trial_value = crf_objective(trial, data, cfg.sigma, &trial_grad, cfg.threads);
      if (std::isfinite(trial_value) && trial_value >= value + kArmijo * step * gg) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    prev_theta = std::move(model.params());
    prev_grad = std::move(grad);
    model = std::move(trial);
    grad = std::move(trial_grad);
    value = trial_value;
    local.objective.push_back(value);
    ++local.iterations;
  }
  local.final_gradient_norm = std::sqrt(norm2(grad));
  if (trace) *trace = std::move(local);
  return model;
}

CRFModel train_crf(const std::vector<TokenizedDocument>& docs, const std::vector<TagSequence>& tags,
                   const CrfConfig& cfg, CrfTrainingTrace* trace) {
  if (docs.size() != tags.size()) throw std::invalid_argument("CRF training: docs/tags length mismatch");
  if (docs.empty()) throw std::invalid_argument("CRF training needs at least one sequence");
  std::vector<std::vector<std::vector<std::string>>> strings;
  strings.reserve(docs.size());
  std::vector<std::string> names;
  for (const auto& d : docs) {
    strings.push_back(feature_strings(d));
    for (const auto& pos : strings.back()) names.insert(names.end(), pos.begin(), pos.end());
  }
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  CRFModel init(std::move(names));
  std::vector<CrfExample> data(docs.size());
  for (std::size_t d = 0; d < docs.size(); ++d) {
    if (tags[d].size() != docs[d].tokens.size()) throw std::invalid_argument("CRF training: tags/tokens length mismatch");
    data[d].features = init.extract_features(docs[d]);
    data[d].tags = tags[d];
  }
  return train_crf(std::move(init), data, cfg, trace);
}

}  // namespace reptrack
