#include "qcap/moments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

#include <boost/math/special_functions/erf.hpp>

#include "qcap/errors.hpp"
#include "qcap/gauss_hermite.hpp"
#include "qcap/random.hpp"

namespace qcap {

ChannelSpec ChannelSpec::awgn(double sigma2, cplx gain) {
  if (!(sigma2 >= 0.0) || !std::isfinite(sigma2))
    throw ContractError("awgn channel: sigma2 must be finite and >= 0");
  if (!std::isfinite(gain.real()) || !std::isfinite(gain.imag()))
    throw ContractError("awgn channel: gain must be finite");
  return ChannelSpec(Awgn{sigma2, gain});
}

ChannelSpec ChannelSpec::custom(std::function<cplx(cplx, cplx)> map,
                                double noise_sigma2, std::string name) {
  if (!map) throw ContractError("custom channel: empty map");
  if (!(noise_sigma2 >= 0.0) || !std::isfinite(noise_sigma2))
    throw ContractError("custom channel: noise variance must be finite and >= 0");
  return ChannelSpec(Custom{std::move(map), noise_sigma2, std::move(name)});
}

double ChannelSpec::noise_sigma2() const noexcept {
  return std::visit([](const auto& k) -> double {
    if constexpr (std::is_same_v<std::decay_t<decltype(k)>, Awgn>)
      return k.sigma2;
    else
      return k.noise_sigma2;
  }, kind_);
}

cplx ChannelSpec::apply(cplx x, cplx xi) const {
  if (const auto* a = std::get_if<Awgn>(&kind_)) return a->gain * x + xi;
  return std::get<Custom>(kind_).map(x, xi);
}

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

// P(a <= X < b) for X ~ N(0, sd^2), accurate in both tails.
double normal_mass(double a, double b, double sd) {
  const double za = a / sd * kInvSqrt2;
  const double zb = b / sd * kInvSqrt2;
  if (za >= 0.0) return 0.5 * (std::erfc(za) - std::erfc(zb));
  if (zb <= 0.0) return 0.5 * (std::erfc(-zb) - std::erfc(-za));
  return 1.0 - 0.5 * std::erfc(zb) - 0.5 * std::erfc(-za);
}

double normal_pdf(double x, double sd) {
  if (std::isinf(x)) return 0.0;
  const double z = x / sd;
  return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

// Per-cell probability and first moment E[X 1{X in cell}] of a step map
// driven by X ~ N(mean, var). Cell k is [t_{k-1}, t_k).
struct Cells {
  std::vector<double> prob;
  std::vector<double> first;  // E[(X - mean) 1{cell}]
};

Cells step_cells(const QuantizerSpec& q, double mean, double var) {
  const auto t = q.thresholds();
  const std::size_t count = q.levels().size();
  Cells c{std::vector<double>(count, 0.0), std::vector<double>(count, 0.0)};
  if (var <= 0.0) {
    const auto it = std::upper_bound(t.begin(), t.end(), mean);
    c.prob[static_cast<std::size_t>(it - t.begin())] = 1.0;
    return c;
  }
  const double sd = std::sqrt(var);
  constexpr double inf = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < count; ++k) {
    const double a = (k == 0 ? -inf : t[k - 1] - mean);
    const double b = (k + 1 == count ? inf : t[k] - mean);
    c.prob[k] = normal_mass(a, b, sd);
    c.first[k] = var * (normal_pdf(a, sd) - normal_pdf(b, sd));
  }
  return c;
}

// (E[q(m + N)], E[q(m + N)^2]) for N ~ N(0, var).
std::pair<double, double> conditional_output(const QuantizerSpec& q, double m,
                                             double var) {
  if (q.is_identity()) return {m, m * m + var};
  const auto levels = q.levels();
  const Cells c = step_cells(q, m, var);
  double m1 = 0.0, m2 = 0.0;
  for (std::size_t k = 0; k < levels.size(); ++k) {
    if (c.prob[k] == 0.0) continue;
    m1 += levels[k] * c.prob[k];
    m2 += levels[k] * levels[k] * c.prob[k];
  }
  return {m1, m2};
}

bool separable(const ChannelSpec& ch) {
  const auto* a = std::get_if<ChannelSpec::Awgn>(&ch.kind());
  return a != nullptr && a->gain.imag() == 0.0;
}

// Separable chain: every stage acts on I and Q independently, so the
// statistics factor into two identical one-dimensional problems.
ChainStatistics separable_statistics(const QuantizerSpec& qtx, double gain,
                                     double sigma2, const QuantizerSpec& qrx,
                                     double pbar) {
  const double v = pbar / 2.0;
  const double n2 = sigma2 / 2.0;
  double m1 = 0.0;  // E[s(X) X]
  double m2 = 0.0;  // E[s(X)^2]

  if (!qtx.is_identity()) {
    const auto levels = qtx.levels();
    const Cells c = step_cells(qtx, 0.0, v);
    for (std::size_t k = 0; k < levels.size(); ++k) {
      if (c.prob[k] == 0.0 && c.first[k] == 0.0) continue;
      const auto [mu1, mu2] = conditional_output(qrx, gain * levels[k], n2);
      m1 += mu1 * c.first[k];
      m2 += mu2 * c.prob[k];
    }
  } else {
    // Y = g X + N is Gaussian; E[q(Y) X] = (g v / var_y) E[q(Y) Y].
    const double var_y = gain * gain * v + n2;
    if (qrx.is_identity()) {
      m1 = gain * v;
      m2 = var_y;
    } else if (var_y <= 0.0) {
      const double l = qrx.quantize_dim(0.0);
      m2 = l * l;
    } else {
      const auto levels = qrx.levels();
      const Cells c = step_cells(qrx, 0.0, var_y);
      double qy = 0.0;
      for (std::size_t k = 0; k < levels.size(); ++k) {
        qy += levels[k] * c.first[k];
        if (c.prob[k] != 0.0) m2 += levels[k] * levels[k] * c.prob[k];
      }
      m1 = gain * v / var_y * qy;
    }
  }
  return {cplx{2.0 * m1, 0.0}, 2.0 * m2, pbar};
}

struct NoiseRule {
  std::vector<cplx> points;
  std::vector<double> weights;
};

NoiseRule noise_rule(double sigma2, int nodes) {
  if (sigma2 == 0.0) return {{cplx{}}, {1.0}};
  const auto r = gaussian_expectation_rule(nodes, sigma2 / 2.0);
  NoiseRule out;
  out.points.reserve(r.nodes.size() * r.nodes.size());
  out.weights.reserve(r.nodes.size() * r.nodes.size());
  for (std::size_t i = 0; i < r.nodes.size(); ++i)
    for (std::size_t j = 0; j < r.nodes.size(); ++j) {
      out.points.emplace_back(r.nodes[i], r.nodes[j]);
      out.weights.push_back(r.weights[i] * r.weights[j]);
    }
  return out;
}

// Adaptive integration over the noise in probability space, for a step-map
// ADC: the integrand is piecewise constant, so a quadtree cell is refined
// wherever its corner and centre outputs differ. Probes sit on a dyadic grid whose
// normal quantiles are tabulated once.
class StepNoiseIntegrator {
 public:
  static constexpr int kGrid = 1 << 14;  // probe resolution per dimension
  static constexpr int kBase = 64;       // forced initial subdivision
  static constexpr int kMinSide = 2;     // finest cell side in grid units

  explicit StepNoiseIntegrator(double sigma2) : q_(kGrid + 1, 0.0) {
    const double sd = std::sqrt(sigma2 / 2.0);
    for (int k = 1; k < kGrid; ++k)
      q_[static_cast<std::size_t>(k)] =
          -std::sqrt(2.0) * sd * boost::math::erfc_inv(2.0 * k / static_cast<double>(kGrid));
  }

  template <class F>
  std::pair<cplx, double> operator()(F&& f) const {
    cplx es{};
    double es2 = 0.0;
    constexpr int side = kGrid / kBase;
    for (int i = 0; i < kGrid; i += side)
      for (int j = 0; j < kGrid; j += side) cell(f, i, j, side, es, es2);
    return {es, es2};
  }

 private:
  // Probability-space coordinate k/kGrid, pulled off the infinite ends.
  double at(int k) const { return q_[static_cast<std::size_t>(std::clamp(k, 1, kGrid - 1))]; }

  template <class F>
  void cell(F& f, int i0, int j0, int len, cplx& es, double& es2) const {
    const int h = len / 2;
    const cplx v[5] = {f(cplx{at(i0), at(j0)}), f(cplx{at(i0 + len), at(j0)}),
                       f(cplx{at(i0), at(j0 + len)}), f(cplx{at(i0 + len), at(j0 + len)}),
                       f(cplx{at(i0 + h), at(j0 + h)})};
    const bool flat = v[0] == v[1] && v[0] == v[2] && v[0] == v[3] && v[0] == v[4];
    if (flat || len == kMinSide) {
      const double w = static_cast<double>(len) * len / (5.0 * kGrid * kGrid);
      for (const auto& s : v) {
        es += w * s;
        es2 += w * std::norm(s);
      }
      return;
    }
    cell(f, i0, j0, h, es, es2);
    cell(f, i0 + h, j0, h, es, es2);
    cell(f, i0, j0 + h, h, es, es2);
    cell(f, i0 + h, j0 + h, h, es, es2);
  }

  std::vector<double> q_;
};

// Exact in U when the DAC is a step map (enumerate its output cells), tensor
// Gauss–Hermite otherwise; tensor Gauss–Hermite over the channel noise.
ChainStatistics general_statistics(const QuantizerSpec& qtx,
                                   const ChannelSpec& ch,
                                   const QuantizerSpec& qrx, double pbar,
                                   const QuadratureMethod& m) {
  const NoiseRule noise = noise_rule(ch.noise_sigma2(), m.noise_nodes);
  std::optional<StepNoiseIntegrator> adaptive;
  if (!qrx.is_identity() && !qtx.is_identity() && ch.noise_sigma2() > 0.0)
    adaptive.emplace(ch.noise_sigma2());
  auto inner = [&](cplx x) {
    if (adaptive) return (*adaptive)([&](cplx xi) { return qrx(ch.apply(x, xi)); });
    cplx es{};
    double es2 = 0.0;
    for (std::size_t i = 0; i < noise.points.size(); ++i) {
      const cplx s = qrx(ch.apply(x, noise.points[i]));
      es += noise.weights[i] * s;
      es2 += noise.weights[i] * std::norm(s);
    }
    return std::pair{es, es2};
  };

  ChainStatistics st{};
  if (!qtx.is_identity()) {
    const auto levels = qtx.levels();
    const Cells c = step_cells(qtx, 0.0, pbar / 2.0);
    for (std::size_t i = 0; i < levels.size(); ++i) {
      for (std::size_t k = 0; k < levels.size(); ++k) {
        const double p = c.prob[i] * c.prob[k];
        const cplx eu{c.first[i] * c.prob[k], c.prob[i] * c.first[k]};
        if (p == 0.0 && eu == cplx{}) continue;
        const auto [es, es2] = inner(cplx{levels[i], levels[k]});
        st.cross += es * std::conj(eu);
        st.output_power += p * es2;
      }
    }
    st.input_power = pbar;
  } else {
    const auto r = gaussian_expectation_rule(m.nodes, pbar / 2.0);
    for (std::size_t i = 0; i < r.nodes.size(); ++i)
      for (std::size_t k = 0; k < r.nodes.size(); ++k) {
        const double w = r.weights[i] * r.weights[k];
        const cplx u{r.nodes[i], r.nodes[k]};
        const auto [es, es2] = inner(u);
        st.cross += w * es * std::conj(u);
        st.output_power += w * es2;
        st.input_power += w * std::norm(u);
      }
  }
  return st;
}

struct Accumulator {
  // Sums of a = S conj(U) (re, im), b = |S|^2, c = |U|^2 and their products.
  double n = 0.0;
  double mean[4] = {0, 0, 0, 0};
  double comoment[4][4] = {};

  void add(cplx s, cplx u) {
    const cplx a = s * std::conj(u);
    const double x[4] = {a.real(), a.imag(), std::norm(s), std::norm(u)};
    n += 1.0;
    double delta[4];
    for (int i = 0; i < 4; ++i) {
      delta[i] = x[i] - mean[i];
      mean[i] += delta[i] / n;
    }
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) comoment[i][j] += delta[i] * (x[j] - mean[j]);
  }
};

template <class Draw>
AgnMoments sampled_moments(double pbar, const MonteCarloMethod& mc, Draw&& draw) {
  if (mc.samples < 2) throw ContractError("Monte-Carlo moments: need at least two samples");
  Accumulator acc;
  for (std::uint64_t i = 0; i < mc.samples; ++i) {
    const auto [s, u] = draw();
    acc.add(s, u);
  }
  const cplx alpha{acc.mean[0] / pbar, acc.mean[1] / pbar};
  // tau = (E b - 2 Re(conj(alpha) E a) + |alpha|^2 E c) / pbar
  const double g[4] = {-2.0 * alpha.real(), -2.0 * alpha.imag(), 1.0, std::norm(alpha)};
  double tau = 0.0, var_d = 0.0;
  for (int i = 0; i < 4; ++i) {
    tau += g[i] * acc.mean[i];
    for (int j = 0; j < 4; ++j) var_d += g[i] * g[j] * acc.comoment[i][j];
  }
  tau /= pbar;
  const double nm1 = acc.n - 1.0;
  var_d /= nm1;
  const double var_a = (acc.comoment[0][0] + acc.comoment[1][1]) / nm1;

  AgnMoments out;
  out.alpha = alpha;
  out.tau = std::max(tau, 0.0);
  out.pbar = pbar;
  out.alpha_stderr = std::sqrt(var_a / acc.n) / pbar;
  out.tau_stderr = std::sqrt(std::max(var_d, 0.0) / acc.n) / pbar;
  if (!std::isfinite(out.alpha.real()) || !std::isfinite(out.alpha.imag()) ||
      !std::isfinite(out.tau))
    throw NumericalError("Monte-Carlo moments are not finite");
  return out;
}

void check_pbar(double pbar) {
  if (!(pbar > 0.0) || !std::isfinite(pbar))
    throw ContractError("moments: pbar must be positive and finite");
}

void check_quadrature(const QuadratureMethod& m) {
  if (m.nodes < 1 || m.noise_nodes < 1)
    throw ContractError("moments: quadrature node counts must be positive");
}

}  // namespace

AgnMoments moments_from_statistics(const ChainStatistics& st, double pbar) {
  const cplx alpha = st.cross / pbar;
  const double out_power = st.output_power / pbar;
  double tau = out_power - std::norm(alpha);
  if (!std::isfinite(alpha.real()) || !std::isfinite(alpha.imag()) ||
      !std::isfinite(tau))
    throw NumericalError("moments: expectation is not finite");
  if (tau < 0.0) {
    if (tau < -1e-9 * std::max(out_power, 1.0))
      throw NumericalError("moments: negative distortion variance");
    tau = 0.0;
  }
  AgnMoments m;
  m.alpha = alpha;
  m.tau = tau;
  m.pbar = pbar;
  return m;
}

AgnMoments tx_moments(const QuantizerSpec& q, double pbar,
                      const MomentMethod& method) {
  return chain_moments(q, ChannelSpec::awgn(0.0), QuantizerSpec::identity(),
                       pbar, method);
}

AgnMoments chain_moments(const QuantizerSpec& qtx, const ChannelSpec& ch,
                         const QuantizerSpec& qrx, double pbar,
                         const MomentMethod& method) {
  check_pbar(pbar);
  if (const auto* mc = std::get_if<MonteCarloMethod>(&method)) {
    auto rng = make_rng(mc->seed, "chain_moments");
    ComplexNormal input(pbar);
    ComplexNormal noise(ch.noise_sigma2());
    return sampled_moments(pbar, *mc, [&] {
      const cplx u = input(rng);
      const cplx xi = noise(rng);
      return std::pair{qrx(ch.apply(qtx(u), xi)), u};
    });
  }
  const auto& quad = std::get<QuadratureMethod>(method);
  check_quadrature(quad);
  if (separable(ch)) {
    const auto& a = std::get<ChannelSpec::Awgn>(ch.kind());
    return moments_from_statistics(
        separable_statistics(qtx, a.gain.real(), a.sigma2, qrx, pbar), pbar);
  }
  return moments_from_statistics(general_statistics(qtx, ch, qrx, pbar, quad), pbar);
}

ChainStatistics chain_statistics_tensor(const QuantizerSpec& qtx,
                                        const ChannelSpec& ch,
                                        const QuantizerSpec& qrx, double pbar,
                                        int nodes, int noise_nodes) {
  check_pbar(pbar);
  check_quadrature({nodes, noise_nodes});
  const auto r = gaussian_expectation_rule(nodes, pbar / 2.0);
  const NoiseRule noise = noise_rule(ch.noise_sigma2(), noise_nodes);
  ChainStatistics st{};
  for (std::size_t i = 0; i < r.nodes.size(); ++i)
    for (std::size_t k = 0; k < r.nodes.size(); ++k) {
      const double w = r.weights[i] * r.weights[k];
      const cplx u{r.nodes[i], r.nodes[k]};
      const cplx x = qtx(u);
      for (std::size_t j = 0; j < noise.points.size(); ++j) {
        const cplx s = qrx(ch.apply(x, noise.points[j]));
        const double wj = w * noise.weights[j];
        st.cross += wj * s * std::conj(u);
        st.output_power += wj * std::norm(s);
      }
      st.input_power += w * std::norm(u);
    }
  return st;
}

}  // namespace qcap
