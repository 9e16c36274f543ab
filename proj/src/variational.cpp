// Copyright 2026 The DLTM Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dltm/variational.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "dltm/error.hpp"
#include "dltm/util.hpp"

namespace dltm {
namespace {

// Slots whose expected topic (or label) mass is below this carry no
// observation.
constexpr double kMassEps = 1e-8;
// Added to the per-coordinate curvature of the topic update.
constexpr double kCurvatureEps = 1e-8;
// Per-coordinate cap on a single topic update step.
constexpr double kMaxTopicStep = 5.0;
constexpr int kLineSearchSteps = 30;
constexpr int kThetaNewtonIters = 50;

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

double LogNormal(double x, double mean, double var) {
  const double d = x - mean;
  return -0.5 * (kLog2Pi + std::log(var)) - d * d / (2.0 * var);
}

void CheckFinite(const VariationalState& state) {
  const auto finite = [](const Cube& c) {
    for (const auto& m : c)
      for (const auto& v : m)
        for (double x : v)
          if (!std::isfinite(x)) return false;
    return true;
  };
  if (!finite(state.beta_mean) || !finite(state.theta_mean)) {
    Fail(ErrorKind::kNumerical, "variational state has non-finite entries");
  }
  for (const auto& row : state.alpha_mean)
    for (double x : row)
      if (!std::isfinite(x)) Fail(ErrorKind::kNumerical, "variational state has non-finite entries");
}

// log pi(beta_zt) for every topic and slot.
Cube TopicLogProbs(const VariationalState& state, int threads) {
  const std::size_t Z = state.topics();
  Cube out(Z);
  ParallelFor(Z, threads, [&](std::size_t z) {
    out[z].resize(state.slots());
    for (std::size_t t = 0; t < state.slots(); ++t) out[z][t] = LogPiMeanMap(state.beta_mean[z][t]);
  });
  return out;
}

Cube LabelLogProbs(const VariationalState& state) {
  Cube out(state.labels());
  for (std::size_t l = 0; l < state.labels(); ++l) {
    out[l].resize(state.slots());
    for (std::size_t t = 0; t < state.slots(); ++t) out[l][t] = LogPiMeanMap(state.theta_mean[l][t]);
  }
  return out;
}

// ---- topic chains ---------------------------------------------------------

// The part of F that depends on topic z's chain.
double TopicObjective(const Mat& beta, const Mat& counts, const Vec& mass,
                      const Hyperparameters& hyper) {
  double f = 0.0;
  const std::size_t T = beta.size();
  const std::size_t V = beta[0].size();
  for (std::size_t t = 0; t < T; ++t) {
    if (mass[t] <= 0.0) continue;
    double dot = 0.0;
    for (std::size_t v = 0; v < V; ++v) dot += counts[t][v] * beta[t][v];
    f += dot - mass[t] * LogSumExp(beta[t]);
  }
  for (std::size_t v = 0; v < V; ++v) {
    f += LogNormal(beta[0][v], 0.0, hyper.beta0_var);
    for (std::size_t t = 1; t < T; ++t) f += LogNormal(beta[t][v], beta[t - 1][v], hyper.sigma2);
  }
  return f;
}

// Maximiser of a separable quadratic surrogate of the topic objective around
// `beta`, combined with the chain prior. Per term v and slot t the surrogate
// is an observation y = beta + g / h with variance 1 / h, where g is the
// gradient of the multinomial term and h its curvature. With newton = true
// h = mass * p (diagonal of the Hessian); otherwise h = mass / 2, which
// bounds the softmax curvature from above and makes the step a minorise-
// maximise update.
Mat ProposeTopicChain(const Mat& beta, const Mat& counts, const Vec& mass,
                      const Hyperparameters& hyper, bool newton, Mat* var) {
  const std::size_t T = beta.size();
  const std::size_t V = beta[0].size();
  Mat prob(T);
  for (std::size_t t = 0; t < T; ++t) prob[t] = PiMeanMap(beta[t]);
  Mat out(T, Vec(V));
  Vec obs(T), obs_var(T);
  for (std::size_t v = 0; v < V; ++v) {
    for (std::size_t t = 0; t < T; ++t) {
      if (mass[t] <= kMassEps) {
        obs[t] = 0.0;
        obs_var[t] = std::numeric_limits<double>::infinity();
        continue;
      }
      const double h = newton ? mass[t] * prob[t][v] + kCurvatureEps : 0.5 * mass[t];
      const double g = counts[t][v] - mass[t] * prob[t][v];
      obs[t] = beta[t][v] + g / h;
      obs_var[t] = 1.0 / h;
    }
    const SmoothedChain sc = KalmanSmoothChain(obs, obs_var, hyper.sigma2, 0.0, hyper.beta0_var);
    for (std::size_t t = 0; t < T; ++t) {
      out[t][v] = sc.mean[t];
      if (var) (*var)[t][v] = sc.var[t];
    }
  }
  return out;
}

void UpdateTopicChain(const Mat& counts, const Hyperparameters& hyper, Mat& beta, Mat& beta_var) {
  const std::size_t T = beta.size();
  const std::size_t V = beta[0].size();
  Vec mass(T, 0.0);
  for (std::size_t t = 0; t < T; ++t)
    for (double c : counts[t]) mass[t] += c;

  const double f0 = TopicObjective(beta, counts, mass, hyper);
  Mat var(T, Vec(V));
  const Mat target = ProposeTopicChain(beta, counts, mass, hyper, /*newton=*/true, &var);
  Mat step(T, Vec(V));
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t v = 0; v < V; ++v)
      step[t][v] = std::clamp(target[t][v] - beta[t][v], -kMaxTopicStep, kMaxTopicStep);

  Mat candidate(T, Vec(V));
  double scale = 1.0;
  for (int k = 0; k < kLineSearchSteps; ++k, scale *= 0.5) {
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t v = 0; v < V; ++v) candidate[t][v] = beta[t][v] + scale * step[t][v];
    if (TopicObjective(candidate, counts, mass, hyper) >= f0) {
      beta = std::move(candidate);
      beta_var = std::move(var);
      return;
    }
  }
  // The bounded-curvature step cannot decrease the objective (up to
  // rounding), so it is the fallback when the Newton direction fails.
  Mat mm_var(T, Vec(V));
  Mat mm = ProposeTopicChain(beta, counts, mass, hyper, /*newton=*/false, &mm_var);
  if (TopicObjective(mm, counts, mass, hyper) >= f0) {
    beta = std::move(mm);
    beta_var = std::move(mm_var);
  }
}

// ---- label chains -----------------------------------------------------------

double ThetaObjective(const Vec& theta, const Vec& counts, double mass, const Vec& prior_mean,
                      double a2) {
  double f = -mass * LogSumExp(theta);
  for (std::size_t z = 0; z < theta.size(); ++z) {
    const double d = theta[z] - prior_mean[z];
    f += counts[z] * theta[z] - d * d / (2.0 * a2);
  }
  return f;
}

// Newton ascent on  m . theta - M lse(theta) - |theta - alpha|^2 / (2 a2),
// which is strictly concave. Returns the Laplace variances at the optimum.
void UpdateTheta(const Vec& counts, const Vec& prior_mean, double a2, Vec& theta, Vec& var) {
  const std::size_t Z = theta.size();
  double mass = 0.0;
  for (double c : counts) mass += c;
  Eigen::MatrixXd neg_hess(Z, Z);
  Eigen::VectorXd grad(Z);
  const auto build = [&](const Vec& th) {
    const Vec p = PiMeanMap(th);
    for (std::size_t i = 0; i < Z; ++i) {
      grad(static_cast<Eigen::Index>(i)) = counts[i] - mass * p[i] - (th[i] - prior_mean[i]) / a2;
      for (std::size_t j = 0; j < Z; ++j) {
        neg_hess(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            -mass * p[i] * p[j] + (i == j ? mass * p[i] + 1.0 / a2 : 0.0);
      }
    }
  };
  if (mass <= kMassEps) {
    theta = prior_mean;
    var.assign(Z, a2);
    return;
  }
  for (int iter = 0; iter < kThetaNewtonIters; ++iter) {
    build(theta);
    const Eigen::VectorXd dir = neg_hess.llt().solve(grad);
    const double f0 = ThetaObjective(theta, counts, mass, prior_mean, a2);
    Vec candidate(Z);
    double scale = 1.0;
    bool moved = false;
    for (int k = 0; k < kLineSearchSteps; ++k, scale *= 0.5) {
      for (std::size_t z = 0; z < Z; ++z) candidate[z] = theta[z] + scale * dir(static_cast<Eigen::Index>(z));
      if (ThetaObjective(candidate, counts, mass, prior_mean, a2) >= f0) {
        moved = true;
        break;
      }
    }
    if (!moved) break;
    double largest = 0.0;
    for (std::size_t z = 0; z < Z; ++z) largest = std::max(largest, std::abs(candidate[z] - theta[z]));
    theta = candidate;
    if (largest < 1e-12) break;
  }
  build(theta);
  const Eigen::MatrixXd cov = neg_hess.llt().solve(Eigen::MatrixXd::Identity(
      static_cast<Eigen::Index>(Z), static_cast<Eigen::Index>(Z)));
  var.resize(Z);
  for (std::size_t z = 0; z < Z; ++z) var[z] = cov(static_cast<Eigen::Index>(z), static_cast<Eigen::Index>(z));
}

// Exact maximiser over alpha given theta: per topic, the label average is an
// observation of alpha_t with variance a2 / L.
void UpdateAlpha(const Hyperparameters& hyper, VariationalState& state, int threads) {
  const std::size_t Z = state.topics();
  const std::size_t T = state.slots();
  const std::size_t L = state.labels();
  ParallelFor(Z, threads, [&](std::size_t z) {
    Vec obs(T, 0.0), obs_var(T, hyper.a2 / static_cast<double>(L));
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t l = 0; l < L; ++l) obs[t] += state.theta_mean[l][t][z];
      obs[t] /= static_cast<double>(L);
    }
    const SmoothedChain sc = KalmanSmoothChain(obs, obs_var, hyper.delta2, 0.0, hyper.delta2);
    for (std::size_t t = 0; t < T; ++t) {
      state.alpha_mean[t][z] = sc.mean[t];
      state.alpha_var[t][z] = sc.var[t];
    }
  });
}

}  // namespace

std::vector<PseudoDoc> ReweightPseudoDocs(const Corpus& corpus) {
  std::vector<PseudoDoc> out;
  std::size_t index = 0;
  for (std::size_t t = 0; t < corpus.slots.size(); ++t) {
    for (const auto& doc : corpus.slots[t]) {
      const double weight = 1.0 / static_cast<double>(doc.labels.size());
      for (int l : doc.labels) {
        out.push_back({index, doc.id, l, static_cast<int>(t), doc.counts, weight});
      }
      ++index;
    }
  }
  return out;
}

VariationalState InitialState(const Corpus& corpus, const Hyperparameters& hyper) {
  hyper.Validate();
  const std::size_t Z = static_cast<std::size_t>(hyper.topics);
  const std::size_t T = static_cast<std::size_t>(corpus.T);
  const std::size_t V = corpus.vocabulary.size();
  const std::size_t L = corpus.num_labels();
  Require(T >= 1 && V >= 1 && L >= 1, "corpus dimensions must be positive");

  Vec freq(V, 1.0);
  double total = static_cast<double>(V);
  for (const auto& slot : corpus.slots) {
    for (const auto& doc : slot) {
      for (const auto& tc : doc.counts) freq[static_cast<std::size_t>(tc.term)] += tc.count;
      total += doc.token_total;
    }
  }
  Engine engine = MakeEngine(hyper.seed, Stream::kInitJitter);
  std::normal_distribution<double> jitter(0.0, 0.1);

  VariationalState state;
  state.beta_mean.assign(Z, Mat(T, Vec(V)));
  state.beta_var.assign(Z, Mat(T, Vec(V, hyper.sigma2)));
  for (std::size_t z = 0; z < Z; ++z) {
    Vec row(V);
    for (std::size_t v = 0; v < V; ++v) row[v] = std::log(freq[v] / total) + jitter(engine);
    for (std::size_t t = 0; t < T; ++t) state.beta_mean[z][t] = row;
  }
  state.theta_mean.assign(L, Mat(T, Vec(Z, 0.0)));
  state.theta_var.assign(L, Mat(T, Vec(Z, hyper.a2)));
  state.alpha_mean.assign(T, Vec(Z, 0.0));
  state.alpha_var.assign(T, Vec(Z, hyper.delta2));
  return state;
}

ExpectedCounts EStep(std::span<const PseudoDoc> pseudo, VariationalState& state, int threads) {
  CheckFinite(state);
  const std::size_t Z = state.topics();
  const std::size_t T = state.slots();
  const std::size_t V = state.vocab();
  const std::size_t L = state.labels();
  const Cube log_beta = TopicLogProbs(state, threads);
  const Cube log_theta = LabelLogProbs(state);

  state.resp.resize(pseudo.size());
  ParallelFor(pseudo.size(), threads, [&](std::size_t p) {
    const PseudoDoc& pd = pseudo[p];
    const auto t = static_cast<std::size_t>(pd.slot);
    const Vec& lt = log_theta[static_cast<std::size_t>(pd.label)][t];
    Vec& r = state.resp[p];
    r.resize(pd.counts.size() * Z);
    Vec a(Z);
    for (std::size_t k = 0; k < pd.counts.size(); ++k) {
      const auto v = static_cast<std::size_t>(pd.counts[k].term);
      double top = -std::numeric_limits<double>::infinity();
      for (std::size_t z = 0; z < Z; ++z) {
        a[z] = lt[z] + log_beta[z][t][v];
        top = std::max(top, a[z]);
      }
      double sum = 0.0;
      for (std::size_t z = 0; z < Z; ++z) {
        a[z] = std::exp(a[z] - top);
        sum += a[z];
      }
      for (std::size_t z = 0; z < Z; ++z) r[k * Z + z] = a[z] / sum;
    }
  });

  ExpectedCounts counts;
  counts.topic_word.assign(Z, Mat(T, Vec(V, 0.0)));
  counts.label_topic.assign(L, Mat(T, Vec(Z, 0.0)));
  // Each worker owns one topic and walks pseudo-documents in order, so the
  // sums are identical for any thread count.
  ParallelFor(Z, threads, [&](std::size_t z) {
    for (std::size_t p = 0; p < pseudo.size(); ++p) {
      const PseudoDoc& pd = pseudo[p];
      const auto t = static_cast<std::size_t>(pd.slot);
      const Vec& r = state.resp[p];
      Vec& tw = counts.topic_word[z][t];
      double label_mass = 0.0;
      for (std::size_t k = 0; k < pd.counts.size(); ++k) {
        const double m = pd.weight * pd.counts[k].count * r[k * Z + z];
        tw[static_cast<std::size_t>(pd.counts[k].term)] += m;
        label_mass += m;
      }
      counts.label_topic[static_cast<std::size_t>(pd.label)][t][z] += label_mass;
    }
  });
  return counts;
}

void MStep(const ExpectedCounts& counts, const Hyperparameters& hyper, VariationalState& state,
           const MStepOptions& options) {
  hyper.Validate();
  for (const auto& m : counts.topic_word)
    for (const auto& v : m)
      for (double x : v) Require(x >= 0.0, "expected counts must be non-negative");

  const std::size_t Z = state.topics();
  const std::size_t T = state.slots();
  const std::size_t L = state.labels();
  ParallelFor(Z, options.threads, [&](std::size_t z) {
    UpdateTopicChain(counts.topic_word[z], hyper, state.beta_mean[z], state.beta_var[z]);
  });
  for (int sweep = 0; sweep < std::max(1, options.label_sweeps); ++sweep) {
    ParallelFor(L, options.threads, [&](std::size_t l) {
      for (std::size_t t = 0; t < T; ++t) {
        UpdateTheta(counts.label_topic[l][t], state.alpha_mean[t], hyper.a2,
                    state.theta_mean[l][t], state.theta_var[l][t]);
      }
    });
    UpdateAlpha(hyper, state, options.threads);
  }
}

double ElboDataTerm(std::span<const PseudoDoc> pseudo, const VariationalState& state,
                    int threads) {
  Require(state.resp.size() == pseudo.size(), "responsibilities do not match pseudo-documents");
  const std::size_t Z = state.topics();
  const Cube log_beta = TopicLogProbs(state, threads);
  const Cube log_theta = LabelLogProbs(state);
  Vec per_doc(pseudo.size(), 0.0);
  ParallelFor(pseudo.size(), threads, [&](std::size_t p) {
    const PseudoDoc& pd = pseudo[p];
    const auto t = static_cast<std::size_t>(pd.slot);
    const Vec& lt = log_theta[static_cast<std::size_t>(pd.label)][t];
    const Vec& r = state.resp[p];
    double acc = 0.0;
    for (std::size_t k = 0; k < pd.counts.size(); ++k) {
      const auto v = static_cast<std::size_t>(pd.counts[k].term);
      double inner = 0.0;
      for (std::size_t z = 0; z < Z; ++z) {
        const double rz = r[k * Z + z];
        if (rz <= 0.0) continue;
        inner += rz * (lt[z] + log_beta[z][t][v] - std::log(rz));
      }
      acc += pd.counts[k].count * inner;
    }
    per_doc[p] = pd.weight * acc;
  });
  double total = 0.0;
  for (double x : per_doc) total += x;
  return total;
}

double ElboPriorTerm(const VariationalState& state, const Hyperparameters& hyper) {
  const std::size_t Z = state.topics();
  const std::size_t T = state.slots();
  const std::size_t V = state.vocab();
  const std::size_t L = state.labels();
  double f = 0.0;
  for (std::size_t z = 0; z < Z; ++z) {
    const Mat& b = state.beta_mean[z];
    for (std::size_t v = 0; v < V; ++v) {
      f += LogNormal(b[0][v], 0.0, hyper.beta0_var);
      for (std::size_t t = 1; t < T; ++t) f += LogNormal(b[t][v], b[t - 1][v], hyper.sigma2);
    }
  }
  for (std::size_t l = 0; l < L; ++l)
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t z = 0; z < Z; ++z)
        f += LogNormal(state.theta_mean[l][t][z], state.alpha_mean[t][z], hyper.a2);
  for (std::size_t z = 0; z < Z; ++z) {
    f += LogNormal(state.alpha_mean[0][z], 0.0, hyper.delta2);
    for (std::size_t t = 1; t < T; ++t)
      f += LogNormal(state.alpha_mean[t][z], state.alpha_mean[t - 1][z], hyper.delta2);
  }
  return f;
}

double Elbo(std::span<const PseudoDoc> pseudo, const VariationalState& state,
            const Hyperparameters& hyper, int threads) {
  return ElboDataTerm(pseudo, state, threads) + ElboPriorTerm(state, hyper);
}

}  // namespace dltm
