#include <cmath>
#include <stdexcept>

#include "reptrack/error.hpp"
#include "reptrack/learners.hpp"
#include "reptrack/random.hpp"

namespace reptrack {
namespace {

// Pegasos-style subgradient descent on one binary hinge problem. The weight
// vector is kept as scale * v so the per-step shrink is O(1); the bias is an
// extra always-on feature and is regularised with the rest.
std::vector<double> train_binary(const Dataset& data, const std::vector<std::size_t>& rows, std::size_t cls,
                                 const LinearConfig& cfg, const std::vector<std::vector<std::size_t>>& orders) {
  const std::size_t F = data.dimension();
  std::vector<double> v(F + 1, 0.0);
  double scale = 1.0;
  double sq_norm = 0.0;  // ||v||^2
  const double radius = 1.0 / std::sqrt(cfg.l2);
  std::size_t t = 0;

  for (const auto& order : orders) {
    for (std::size_t pos : order) {
      const std::size_t i = rows[pos];
      const SparseVector& x = data.vectors[i];
      const double y = data.labels[i] == cls ? 1.0 : -1.0;
      ++t;
      const double eta = 1.0 / (cfg.l2 * static_cast<double>(t));
      const double margin = y * scale * (x.dot(v) + v[F]);

      const double shrink = 1.0 - eta * cfg.l2;
      if (shrink <= 0.0) {
        std::fill(v.begin(), v.end(), 0.0);
        scale = 1.0;
        sq_norm = 0.0;
      } else {
        scale *= shrink;
      }
      if (margin < 1.0) {
        const double step = eta * y / scale;
        auto cols = x.columns();
        auto vals = x.values();
        for (std::size_t k = 0; k < cols.size(); ++k) {
          double& w = v[cols[k]];
          sq_norm -= w * w;
          w += step * vals[k];
          sq_norm += w * w;
        }
        sq_norm -= v[F] * v[F];
        v[F] += step;
        sq_norm += v[F] * v[F];
      }
      const double norm = scale * std::sqrt(std::max(sq_norm, 0.0));
      if (norm > radius) scale *= radius / norm;
      if (scale < 1e-9) {
        for (double& w : v) w *= scale;
        sq_norm *= scale * scale;
        scale = 1.0;
      }
    }
  }
  for (double& w : v) w *= scale;
  return v;
}

std::vector<std::vector<double>> train_all(const Dataset& data, const std::vector<std::size_t>& rows,
                                           const LinearConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<std::size_t>> orders(static_cast<std::size_t>(cfg.epochs));
  for (auto& o : orders) {
    o.resize(rows.size());
    for (std::size_t k = 0; k < o.size(); ++k) o[k] = k;
    rng.shuffle(o);
  }
  std::vector<std::vector<double>> out;
  for (std::size_t c = 0; c < data.n_classes(); ++c) out.push_back(train_binary(data, rows, c, cfg, orders));
  return out;
}

double decision(const std::vector<double>& w, const SparseVector& x) { return x.dot(w) + w.back(); }

double sigmoid_prob(double a, double b, double f) {
  double z = a * f + b;
  return z >= 0 ? std::exp(-z) / (1.0 + std::exp(-z)) : 1.0 / (1.0 + std::exp(z));
}

}  // namespace

std::pair<double, double> fit_platt(const std::vector<double>& dec, const std::vector<bool>& positive) {
  const std::size_t n = dec.size();
  double prior1 = 0, prior0 = 0;
  for (bool p : positive) (p ? prior1 : prior0) += 1;
  const double hi = (prior1 + 1.0) / (prior1 + 2.0);
  const double lo = 1.0 / (prior0 + 2.0);
  std::vector<double> target(n);
  for (std::size_t i = 0; i < n; ++i) target[i] = positive[i] ? hi : lo;

  auto objective = [&](double a, double b) {
    double f = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double z = dec[i] * a + b;
      f += z >= 0 ? target[i] * z + std::log1p(std::exp(-z)) : (target[i] - 1) * z + std::log1p(std::exp(z));
    }
    return f;
  };

  const double sigma = 1e-12, min_step = 1e-10;
  double a = 0.0, b = std::log((prior0 + 1.0) / (prior1 + 1.0));
  double fval = objective(a, b);
  for (int iter = 0; iter < 100; ++iter) {
    double h11 = sigma, h22 = sigma, h21 = 0, g1 = 0, g2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double z = dec[i] * a + b;
      double p, q;
      if (z >= 0) {
        p = std::exp(-z) / (1.0 + std::exp(-z));
        q = 1.0 / (1.0 + std::exp(-z));
      } else {
        p = 1.0 / (1.0 + std::exp(z));
        q = std::exp(z) / (1.0 + std::exp(z));
      }
      double d2 = p * q;
      h11 += dec[i] * dec[i] * d2;
      h22 += d2;
      h21 += dec[i] * d2;
      double d1 = target[i] - p;
      g1 += dec[i] * d1;
      g2 += d1;
    }
    if (std::abs(g1) < 1e-5 && std::abs(g2) < 1e-5) break;
    double det = h11 * h22 - h21 * h21;
    double da = -(h22 * g1 - h21 * g2) / det;
    double db = -(-h21 * g1 + h11 * g2) / det;
    double gd = g1 * da + g2 * db;
    double step = 1.0;
    while (step >= min_step) {
      double na = a + step * da, nb = b + step * db;
      double nf = objective(na, nb);
      if (nf < fval + 1e-4 * step * gd) {
        a = na;
        b = nb;
        fval = nf;
        break;
      }
      step /= 2;
    }
    if (step < min_step) break;
  }
  return {a, b};
}

LinearModel::LinearModel(std::size_t dimension, std::vector<ClassWeights> classes)
    : dimension_(dimension), classes_(std::move(classes)) {
  for (const auto& c : classes_)
    if (c.weights.size() != dimension_ + 1) throw std::invalid_argument("linear weight dimension mismatch");
}

double LinearModel::margin(std::size_t cls, const SparseVector& vec) const {
  check_dimension(vec);
  return decision(classes_.at(cls).weights, vec);
}

Distribution LinearModel::predict_proba(const SparseVector& vec) const {
  check_dimension(vec);
  Distribution p(classes_.size());
  double total = 0;
  for (std::size_t c = 0; c < classes_.size(); ++c) {
    const auto& cw = classes_[c];
    p[c] = sigmoid_prob(cw.platt_a, cw.platt_b, decision(cw.weights, vec));
    total += p[c];
  }
  if (total > 0) {
    for (double& x : p) x /= total;
  } else {
    for (double& x : p) x = 1.0 / static_cast<double>(p.size());
  }
  return p;
}

void LinearModel::save(Writer& w) const {
  w.word("linear").u(dimension_).u(classes_.size()).endl();
  for (const auto& c : classes_) {
    w.word("platt").d(c.platt_a).d(c.platt_b).endl();
    std::size_t nnz = 0;
    for (double x : c.weights) nnz += x != 0.0;
    w.word("weights").u(nnz);
    for (std::size_t k = 0; k < c.weights.size(); ++k)
      if (c.weights[k] != 0.0) w.u(k).d(c.weights[k]);
    w.endl();
  }
}

std::unique_ptr<LinearModel> LinearModel::load(Reader& r) {
  auto dim = r.count();
  auto k = r.count(1 << 16);
  std::vector<ClassWeights> classes(k);
  for (auto& c : classes) {
    r.expect("platt");
    c.platt_a = r.d();
    c.platt_b = r.d();
    r.expect("weights");
    auto nnz = r.count(dim + 1);
    c.weights.assign(dim + 1, 0.0);
    for (std::size_t j = 0; j < nnz; ++j) {
      auto col = r.count(dim);
      c.weights[col] = r.d();
    }
  }
  return std::make_unique<LinearModel>(dim, std::move(classes));
}

LinearModel train_linear(const Dataset& data, const LinearConfig& cfg) {
  data.validate();
  if (data.observed_classes() < 2) throw std::invalid_argument("linear model needs at least two observed classes");
  if (!(cfg.l2 > 0) || cfg.epochs < 1) throw std::invalid_argument("linear config requires l2 > 0 and epochs >= 1");
  const std::size_t n = data.size(), K = data.n_classes();

  // Out-of-fold margins for calibration.
  const std::size_t folds = std::max<std::size_t>(1, std::min<std::size_t>(static_cast<std::size_t>(cfg.calibration_folds), n));
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  Rng fold_rng(Rng::mix(cfg.seed, 1000));
  fold_rng.shuffle(perm);
  std::vector<std::size_t> fold_of(n);
  for (std::size_t k = 0; k < n; ++k) fold_of[perm[k]] = k % folds;

  std::vector<std::vector<double>> oof(K, std::vector<double>(n, 0.0));
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<std::size_t> train_rows;
    for (std::size_t i = 0; i < n; ++i)
      if (folds == 1 || fold_of[i] != f) train_rows.push_back(i);
    auto weights = train_all(data, train_rows, cfg, Rng::mix(cfg.seed, 2000 + f));
    for (std::size_t i = 0; i < n; ++i)
      if (folds == 1 || fold_of[i] == f)
        for (std::size_t c = 0; c < K; ++c) oof[c][i] = decision(weights[c], data.vectors[i]);
  }

  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  auto weights = train_all(data, all, cfg, cfg.seed);
  std::vector<LinearModel::ClassWeights> classes(K);
  for (std::size_t c = 0; c < K; ++c) {
    std::vector<bool> pos(n);
    for (std::size_t i = 0; i < n; ++i) pos[i] = data.labels[i] == c;
    auto [a, b] = fit_platt(oof[c], pos);
    classes[c] = {std::move(weights[c]), a, b};
  }
  return LinearModel(data.dimension(), std::move(classes));
}

}  // namespace reptrack
