#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "recourse/error.hpp"
#include "recourse/german_credit.hpp"
#include "recourse/io.hpp"
#include "recourse/rng.hpp"
#include "recourse/types.hpp"

// L2-penalized logistic regression fitted by damped Newton iterations, plus
// calibration diagnostics and the logit-scale sharpening transform.

namespace recourse::logit {

using german::EncodedRecord;

struct TrainConfig {
  int max_iterations = 100;
  double tolerance = 1e-8;  // on the gradient 2-norm
  double l2 = 1e-4;         // per-sample penalty on weights (not the intercept)
  std::uint64_t seed = 42;
  double train_fraction = 0.75;

  void validate() const {
    if (max_iterations < 1) throw ValidationError("max_iterations must be positive");
    if (!(tolerance > 0.0) || !std::isfinite(tolerance)) throw ValidationError("tolerance must be > 0");
    if (!(l2 >= 0.0) || !std::isfinite(l2)) throw ValidationError("l2 must be >= 0");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ValidationError("train_fraction must be in (0, 1)");
  }
};

/// Shuffle with the configured seed, then cut at floor(n * train_fraction).
template <typename T>
std::pair<std::vector<T>, std::vector<T>> split(std::span<const T> records, const TrainConfig& config) {
  config.validate();
  if (records.size() < 2) throw ValidationError("split: need at least 2 records");
  std::vector<T> shuffled(records.begin(), records.end());
  deterministic_shuffle(std::span<T>(shuffled), config.seed);
  const auto cut = static_cast<std::size_t>(std::floor(static_cast<double>(records.size()) * config.train_fraction));
  std::vector<T> test(std::make_move_iterator(shuffled.begin() + static_cast<std::ptrdiff_t>(cut)),
                      std::make_move_iterator(shuffled.end()));
  shuffled.resize(cut);
  return {std::move(shuffled), std::move(test)};
}

inline double sigmoid(double z) noexcept {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// log(1 + exp(x)) without overflow.
inline double softplus(double x) noexcept { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

struct TrainingInfo {
  int iterations = 0;
  double gradient_norm = 0.0;
  bool converged = false;
  double l2 = 0.0;
  std::size_t train_size = 0;
};

struct LogitModel {
  std::vector<std::string> feature_names;
  std::vector<double> weights;
  double intercept = 0.0;
  std::uint64_t fingerprint = 0;
  TrainingInfo info;
};

// Parameters are packed as [w_0 .. w_{d-1}, b].
struct Objective {
  double value = 0.0;
  std::vector<double> gradient;
};

/// Mean negative log-likelihood plus (l2 / 2) * |w|^2, and its gradient.
inline Objective logit_objective(std::span<const double> theta, std::span<const EncodedRecord> data, double l2) {
  const std::size_t d = theta.size() - 1;
  const double n = static_cast<double>(data.size());
  Objective obj;
  obj.gradient.assign(theta.size(), 0.0);
  for (const auto& r : data) {
    double z = theta[d];
    for (std::size_t j = 0; j < d; ++j) z += theta[j] * r.features[j];
    const double y = r.label;
    obj.value += softplus(-y * z);
    const double coef = -y * sigmoid(-y * z);
    for (std::size_t j = 0; j < d; ++j) obj.gradient[j] += coef * r.features[j];
    obj.gradient[d] += coef;
  }
  obj.value /= n;
  for (double& g : obj.gradient) g /= n;
  for (std::size_t j = 0; j < d; ++j) {
    obj.value += 0.5 * l2 * theta[j] * theta[j];
    obj.gradient[j] += l2 * theta[j];
  }
  return obj;
}

namespace detail {

inline double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

/// Solves A x = b for symmetric positive definite A (row-major, k x k) by
/// Cholesky. Returns false if A is not numerically positive definite.
inline bool cholesky_solve(std::vector<double> a, std::span<const double> b, std::vector<double>& x) {
  const std::size_t k = b.size();
  for (std::size_t j = 0; j < k; ++j) {
    double diag = a[j * k + j];
    for (std::size_t p = 0; p < j; ++p) diag -= a[j * k + p] * a[j * k + p];
    if (!(diag > 0.0)) return false;
    const double l = std::sqrt(diag);
    a[j * k + j] = l;
    for (std::size_t i = j + 1; i < k; ++i) {
      double s = a[i * k + j];
      for (std::size_t p = 0; p < j; ++p) s -= a[i * k + p] * a[j * k + p];
      a[i * k + j] = s / l;
    }
  }
  x.assign(b.begin(), b.end());
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t p = 0; p < i; ++p) x[i] -= a[i * k + p] * x[p];
    x[i] /= a[i * k + i];
  }
  for (std::size_t i = k; i-- > 0;) {
    for (std::size_t p = i + 1; p < k; ++p) x[i] -= a[p * k + i] * x[p];
    x[i] /= a[i * k + i];
  }
  return true;
}

inline std::vector<double> hessian(std::span<const double> theta, std::span<const EncodedRecord> data, double l2) {
  const std::size_t d = theta.size() - 1;
  const std::size_t k = d + 1;
  std::vector<double> h(k * k, 0.0);
  std::vector<double> x(k);
  for (const auto& r : data) {
    double z = theta[d];
    for (std::size_t j = 0; j < d; ++j) z += theta[j] * r.features[j];
    const double s = sigmoid(z);
    const double w = s * (1.0 - s);
    std::copy(r.features.begin(), r.features.end(), x.begin());
    x[d] = 1.0;
    for (std::size_t i = 0; i < k; ++i) {
      const double wi = w * x[i];
      if (wi == 0.0) continue;
      for (std::size_t j = 0; j <= i; ++j) h[i * k + j] += wi * x[j];
    }
  }
  const double n = static_cast<double>(data.size());
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      h[i * k + j] /= n;
      h[j * k + i] = h[i * k + j];
    }
  }
  for (std::size_t j = 0; j < d; ++j) h[j * k + j] += l2;
  return h;
}

}  // namespace detail

inline void check_training_set(std::span<const EncodedRecord> data) {
  if (data.empty()) throw ValidationError("train_logit: empty training set");
  const std::size_t width = data.front().features.size();
  bool pos = false;
  bool neg = false;
  for (const auto& r : data) {
    if (r.features.size() != width) throw ValidationError("train_logit: inconsistent feature width");
    if (r.fingerprint != data.front().fingerprint) throw ValidationError("train_logit: mixed encodings");
    if (r.label != 1 && r.label != -1) throw ValidationError("train_logit: labels must be +1 or -1");
    for (double x : r.features) {
      if (!std::isfinite(x)) throw ValidationError("train_logit: non-finite feature value");
    }
    pos = pos || r.label == 1;
    neg = neg || r.label == -1;
  }
  if (!pos || !neg) throw ValidationError("train_logit: training set has a single class");
}

/// Newton's method with backtracking on the penalized objective. Stops when
/// the gradient norm drops below `tolerance`; if `max_iterations` is reached
/// first the model is returned with `info.converged == false`.
inline LogitModel train_logit(std::span<const EncodedRecord> data, const TrainConfig& config,
                              std::vector<std::string> feature_names = {}) {
  config.validate();
  check_training_set(data);
  const std::size_t d = data.front().features.size();
  if (feature_names.empty()) {
    for (std::size_t j = 0; j < d; ++j) feature_names.push_back("x" + std::to_string(j));
  }
  if (feature_names.size() != d) throw ValidationError("train_logit: feature name count does not match width");

  std::vector<double> theta(d + 1, 0.0);
  Objective obj = logit_objective(theta, data, config.l2);
  TrainingInfo info;
  info.l2 = config.l2;
  info.train_size = data.size();
  std::vector<double> step;
  std::vector<double> trial(d + 1);

  for (int it = 0; it < config.max_iterations; ++it) {
    info.gradient_norm = detail::norm2(obj.gradient);
    if (info.gradient_norm < config.tolerance) {
      info.converged = true;
      break;
    }
    std::vector<double> h = detail::hessian(theta, data, config.l2);
    double jitter = 0.0;
    while (!detail::cholesky_solve(h, obj.gradient, step)) {
      jitter = jitter == 0.0 ? 1e-10 : jitter * 10.0;
      if (jitter > 1.0) throw NonConvergenceError("train_logit: Hessian is not positive definite");
      for (std::size_t j = 0; j <= d; ++j) h[j * (d + 1) + j] += jitter;
    }
    double slope = 0.0;
    for (std::size_t j = 0; j <= d; ++j) slope += step[j] * obj.gradient[j];
    double t = 1.0;
    Objective next;
    while (true) {
      for (std::size_t j = 0; j <= d; ++j) trial[j] = theta[j] - t * step[j];
      next = logit_objective(trial, data, config.l2);
      if (next.value <= obj.value - 1e-4 * t * slope || t < 1e-12) break;
      t *= 0.5;
    }
    theta = trial;
    obj = std::move(next);
    info.iterations = it + 1;
  }
  if (!info.converged) {
    info.gradient_norm = detail::norm2(obj.gradient);
    info.converged = info.gradient_norm < config.tolerance;
  }

  LogitModel model;
  model.feature_names = std::move(feature_names);
  model.weights.assign(theta.begin(), theta.end() - 1);
  model.intercept = theta[d];
  model.fingerprint = data.front().fingerprint;
  model.info = info;
  return model;
}

/// sigmoid(w.x + b), clamped into the open interval (0, 1).
inline Probability predict_proba(const LogitModel& model, std::span<const double> features) {
  if (features.size() != model.weights.size()) {
    throw ValidationError("predict_proba: feature width " + std::to_string(features.size()) +
                          " does not match model width " + std::to_string(model.weights.size()));
  }
  double z = model.intercept;
  for (std::size_t j = 0; j < features.size(); ++j) z += model.weights[j] * features[j];
  const double p = sigmoid(z);
  constexpr double kLow = std::numeric_limits<double>::denorm_min();
  const double high = std::nextafter(1.0, 0.0);
  return Probability(std::clamp(p, kLow, high));
}

inline Probability predict_proba(const LogitModel& model, const EncodedRecord& record) {
  if (record.fingerprint != model.fingerprint) {
    throw ValidationError("predict_proba: record encoding does not match the model's encoding");
  }
  return predict_proba(model, std::span<const double>(record.features));
}

inline double accuracy(const LogitModel& model, std::span<const EncodedRecord> data) {
  if (data.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& r : data) {
    const int predicted = predict_proba(model, r).value() >= 0.5 ? 1 : -1;
    hits += predicted == r.label;
  }
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

// ---------------------------------------------------------------------------
// Calibration

struct CalibrationBin {
  double lower = 0.0;
  double upper = 0.0;
  double mean_predicted = 0.0;  // 0 for an empty bin
  double positive_rate = 0.0;   // 0 for an empty bin
  std::size_t count = 0;
};

struct CalibrationReport {
  std::vector<CalibrationBin> bins;
  double expected_calibration_error = 0.0;
};

/// Equal-width bins on [0, 1]; p = 1 falls in the last bin. A label counts
/// as positive when it is > 0, so both {0, 1} and {-1, +1} codings work.
inline CalibrationReport calibration_report(std::span<const double> probs, std::span<const int> labels,
                                            std::size_t n_bins = 10) {
  if (probs.size() != labels.size()) throw ValidationError("calibration_report: length mismatch");
  if (n_bins < 1) throw ValidationError("calibration_report: need at least one bin");
  CalibrationReport rep;
  rep.bins.resize(n_bins);
  std::vector<double> sum_p(n_bins, 0.0);
  std::vector<std::size_t> pos(n_bins, 0);
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double p = Probability(probs[i]).value();
    const auto b = std::min(static_cast<std::size_t>(p * static_cast<double>(n_bins)), n_bins - 1);
    ++rep.bins[b].count;
    sum_p[b] += p;
    pos[b] += labels[i] > 0;
  }
  double ece = 0.0;
  for (std::size_t b = 0; b < n_bins; ++b) {
    CalibrationBin& bin = rep.bins[b];
    bin.lower = static_cast<double>(b) / static_cast<double>(n_bins);
    bin.upper = static_cast<double>(b + 1) / static_cast<double>(n_bins);
    if (bin.count == 0) continue;
    const double c = static_cast<double>(bin.count);
    bin.mean_predicted = sum_p[b] / c;
    bin.positive_rate = static_cast<double>(pos[b]) / c;
    ece += c * std::abs(bin.mean_predicted - bin.positive_rate);
  }
  rep.expected_calibration_error = probs.empty() ? 0.0 : ece / static_cast<double>(probs.size());
  return rep;
}

// ---------------------------------------------------------------------------
// Sharpening: p' = sigmoid(beta * logit(p)). Fixes 0.5, keeps order, and
// pushes mass toward 0 and 1 as beta grows. 0 and 1 map to themselves and
// beta = 1 returns the input unchanged.

inline double sharpen_one(double p, double beta) {
  const double v = Probability(p).value();
  if (v == 0.0 || v == 1.0 || beta == 1.0) return v;
  return sigmoid(beta * std::log(v / (1.0 - v)));
}

inline std::vector<double> sharpen(std::span<const double> probs, double beta) {
  if (!(beta >= 1.0) || !std::isfinite(beta)) throw ValidationError("sharpen: beta must be a finite value >= 1");
  std::vector<double> out;
  out.reserve(probs.size());
  for (double p : probs) out.push_back(sharpen_one(p, beta));
  return out;
}

// ---------------------------------------------------------------------------
// Persistence: one key=value pair per line. Weights keep their feature order.
// Doubles use 17 significant digits, so load(save(m)) reproduces m exactly.

inline constexpr std::string_view kModelFormat = "recourse-logit-v1";

inline std::string fingerprint_hex(std::uint64_t fp) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fp));
  return buf;
}

inline std::string save_model(const LogitModel& model) {
  std::string out;
  auto kv = [&out](std::string_view k, const std::string& v) {
    out.append(k);
    out += '=';
    out += v;
    out += '\n';
  };
  kv("format", std::string(kModelFormat));
  kv("fingerprint", fingerprint_hex(model.fingerprint));
  kv("intercept", io::format_exact(model.intercept));
  for (std::size_t j = 0; j < model.weights.size(); ++j) {
    kv("weight." + model.feature_names[j], io::format_exact(model.weights[j]));
  }
  kv("train.iterations", std::to_string(model.info.iterations));
  kv("train.gradient_norm", io::format_exact(model.info.gradient_norm));
  kv("train.converged", model.info.converged ? "true" : "false");
  kv("train.l2", io::format_exact(model.info.l2));
  kv("train.size", std::to_string(model.info.train_size));
  return out;
}

inline LogitModel load_model(std::string_view text) {
  LogitModel model;
  bool saw_format = false;
  std::size_t line_no = 0;
  for (std::string_view line : io::split(text, '\n')) {
    ++line_no;
    line = io::trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.rfind('=');  // feature names may contain '='
    if (eq == std::string_view::npos) {
      throw ValidationError("model line " + std::to_string(line_no) + ": expected key=value");
    }
    const std::string_view key = line.substr(0, eq);
    const std::string_view value = line.substr(eq + 1);
    if (key == "format") {
      if (value != kModelFormat) throw ValidationError("unsupported model format '" + std::string(value) + "'");
      saw_format = true;
    } else if (key == "fingerprint") {
      model.fingerprint = std::stoull(std::string(value), nullptr, 16);
    } else if (key == "intercept") {
      model.intercept = io::parse_double(value, "intercept");
    } else if (key.starts_with("weight.")) {
      model.feature_names.emplace_back(key.substr(7));
      model.weights.push_back(io::parse_double(value, key));
    } else if (key == "train.iterations") {
      model.info.iterations = static_cast<int>(io::parse_double(value, key));
    } else if (key == "train.gradient_norm") {
      model.info.gradient_norm = io::parse_double(value, key);
    } else if (key == "train.converged") {
      model.info.converged = value == "true";
    } else if (key == "train.l2") {
      model.info.l2 = io::parse_double(value, key);
    } else if (key == "train.size") {
      model.info.train_size = static_cast<std::size_t>(io::parse_double(value, key));
    } else {
      throw ValidationError("model line " + std::to_string(line_no) + ": unknown key '" + std::string(key) + "'");
    }
  }
  if (!saw_format) throw ValidationError("model file has no format line");
  return model;
}

}  // namespace recourse::logit
