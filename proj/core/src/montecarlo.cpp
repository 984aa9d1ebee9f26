#include "qcap/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <memory>
#include <mutex>
#include <thread>

#include "fft.hpp"
#include "qcap/errors.hpp"
#include "qcap/haar.hpp"
#include "qcap/random.hpp"

namespace qcap {

std::vector<int> make_subband_assignment(std::span<const double> deltas,
                                         std::size_t n, SubbandLayout layout,
                                         std::uint64_t seed) {
  validate_deltas(deltas);
  if (n == 0) throw ContractError("make_subband_assignment: n must be >= 1");
  const std::size_t bands = deltas.size();

  // Largest-remainder apportionment, ties to the lower band index.
  std::vector<std::size_t> counts(bands);
  std::vector<std::pair<double, std::size_t>> rem(bands);
  std::size_t used = 0;
  for (std::size_t m = 0; m < bands; ++m) {
    const double exact = deltas[m] * static_cast<double>(n);
    counts[m] = static_cast<std::size_t>(std::floor(exact));
    used += counts[m];
    rem[m] = {exact - std::floor(exact), m};
  }
  std::stable_sort(rem.begin(), rem.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; used < n && i < bands; ++i, ++used) ++counts[rem[i].second];

  std::vector<int> a;
  a.reserve(n);
  switch (layout) {
    case SubbandLayout::contiguous:
    case SubbandLayout::scattered:
      for (std::size_t m = 0; m < bands; ++m) a.insert(a.end(), counts[m], static_cast<int>(m));
      if (layout == SubbandLayout::scattered) {
        auto rng = make_rng(seed, "subband_assignment");
        std::shuffle(a.begin(), a.end(), rng);
      }
      break;
    case SubbandLayout::interleaved: {
      std::vector<std::size_t> assigned(bands, 0);
      for (std::size_t k = 0; k < n; ++k) {
        std::size_t best = bands;
        double best_deficit = -1e300;
        for (std::size_t m = 0; m < bands; ++m) {
          if (assigned[m] >= counts[m]) continue;
          const double deficit = static_cast<double>(counts[m]) * static_cast<double>(k + 1) /
                                     static_cast<double>(n) -
                                 static_cast<double>(assigned[m]);
          if (deficit > best_deficit) {
            best_deficit = deficit;
            best = m;
          }
        }
        ++assigned[best];
        a.push_back(static_cast<int>(best));
      }
      break;
    }
  }
  return a;
}

namespace {

struct Transform {
  virtual ~Transform() = default;
  virtual void forward(std::span<cplx> x) const = 0;  // x <- V x
  virtual void adjoint(std::span<cplx> x) const = 0;  // x <- V^H x
};

struct HaarTransform final : Transform {
  HaarUnitary v;
  explicit HaarTransform(HaarUnitary h) : v(std::move(h)) {}
  void forward(std::span<cplx> x) const override { v.apply(x); }
  void adjoint(std::span<cplx> x) const override { v.apply_adjoint(x); }
};

// V is the unitary DFT, so V^H z is the normalised inverse DFT.
struct FftTransform final : Transform {
  detail::Fft fwd, bwd;
  double scale;
  explicit FftTransform(std::size_t n)
      : fwd(n, detail::Fft::Direction::forward),
        bwd(n, detail::Fft::Direction::backward),
        scale(1.0 / std::sqrt(static_cast<double>(n))) {}
  void forward(std::span<cplx> x) const override {
    fwd(x);
    for (auto& e : x) e *= scale;
  }
  void adjoint(std::span<cplx> x) const override {
    bwd(x);
    for (auto& e : x) e *= scale;
  }
};

struct TrialSums {
  std::vector<double> s_m;
  double unitarity = 0.0;
  double bookkeeping = 0.0;
  // Re/Im power sums of w: orders 1..4.
  double re[4] = {0, 0, 0, 0};
  double im[4] = {0, 0, 0, 0};
  double re_im = 0.0;
  cplx zw{};
  double zz = 0.0, ww = 0.0;
  // Per band: sum conj(z) zhat, sum |z|^2, sum |zhat|^2.
  std::vector<cplx> rho_cross;
  std::vector<double> rho_z, rho_zhat;
};

double norm2(std::span<const cplx> x) {
  double s = 0.0;
  for (const auto& e : x) s += std::norm(e);
  return s;
}

class Runner {
 public:
  Runner(const SimConfig& cfg, bool chain) : cfg_(cfg), chain_(chain) {
    if (cfg.n == 0) throw ContractError("montecarlo: n must be >= 1");
    if (cfg.trials == 0) throw ContractError("montecarlo: trials must be >= 1");
    bands_ = cfg.plan.bands();
    assignment_ = cfg.subband_assignment.empty()
                      ? make_subband_assignment(cfg.plan.deltas(), cfg.n, cfg.layout, cfg.seed)
                      : cfg.subband_assignment;
    check_assignment();
    if (cfg.transform == TransformKind::fft) fft_ = std::make_unique<FftTransform>(cfg.n);
  }

  SimReport run() {
    SimReport rep;
    rep.n = cfg_.n;
    rep.trials = cfg_.trials;
    rep.seed = cfg_.seed;
    rep.transform = cfg_.transform;
    const double pbar = cfg_.plan.pbar();
    rep.m_tx = tx_moments(cfg_.qtx, pbar);
    alpha_tx_ = rep.m_tx.alpha;
    if (chain_) rep.m_rx = chain_moments(cfg_.qtx, cfg_.channel, cfg_.qrx, pbar);

    std::vector<TrialSums> sums(cfg_.trials);
    run_all(sums);

    predict(rep);
    reduce(rep, sums);
    return rep;
  }

 private:
  void check_assignment() const {
    if (assignment_.size() != cfg_.n)
      throw ContractError("montecarlo: subband assignment length differs from n");
    std::vector<std::size_t> counts(bands_, 0);
    for (int a : assignment_) {
      if (a < 0 || static_cast<std::size_t>(a) >= bands_)
        throw ContractError("montecarlo: subband assignment refers to a missing band");
      ++counts[static_cast<std::size_t>(a)];
    }
    const double n = static_cast<double>(cfg_.n);
    for (std::size_t m = 0; m < bands_; ++m)
      if (std::abs(static_cast<double>(counts[m]) / n - cfg_.plan.deltas()[m]) > 1.0 / n + 1e-12)
        throw ContractError("montecarlo: subband assignment fractions do not match the plan");
  }

  void run_all(std::vector<TrialSums>& sums) const {
    unsigned workers = cfg_.workers ? cfg_.workers : std::thread::hardware_concurrency();
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(cfg_.trials)));
    if (workers == 1) {
      for (std::size_t t = 0; t < cfg_.trials; ++t) sums[t] = trial(t);
      return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t t; (t = next.fetch_add(1)) < cfg_.trials;) {
          try {
            sums[t] = trial(t);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
          }
        }
      });
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
  }

  TrialSums trial(std::size_t t) const {
    const std::size_t n = cfg_.n;
    auto rng = make_rng(cfg_.seed, "montecarlo_trial", t);
    std::unique_ptr<Transform> haar;
    if (cfg_.transform == TransformKind::haar)
      haar = std::make_unique<HaarTransform>(HaarUnitary::sample(n, rng));
    const Transform& v = haar ? *haar : *fft_;

    TrialSums s;
    s.s_m.assign(bands_, 0.0);
    ComplexNormal cn(1.0);
    std::vector<cplx> z(n);
    for (std::size_t k = 0; k < n; ++k)
      z[k] = std::sqrt(cfg_.plan.powers()[static_cast<std::size_t>(assignment_[k])]) * cn(rng);

    std::vector<cplx> u = z;
    v.adjoint(u);
    const double zn = std::sqrt(norm2(z));
    if (zn > 0.0) s.unitarity = std::abs(std::sqrt(norm2(u)) - zn) / zn;

    std::vector<cplx> x(n);
    quantize(cfg_.qtx, u, x);
    std::vector<cplx> r = x;
    v.forward(r);

    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t k = 0; k < n; ++k)
      s.s_m[static_cast<std::size_t>(assignment_[k])] += std::norm(r[k]) * inv_n;
    s.bookkeeping = std::abs(std::accumulate(s.s_m.begin(), s.s_m.end(), 0.0) - norm2(x) * inv_n);

    for (std::size_t k = 0; k < n; ++k) {
      const cplx w = r[k] - alpha_tx_ * z[k];
      double pr = 1.0, pi = 1.0;
      for (int o = 0; o < 4; ++o) {
        pr *= w.real();
        pi *= w.imag();
        s.re[o] += pr;
        s.im[o] += pi;
      }
      s.re_im += w.real() * w.imag();
      s.zw += std::conj(z[k]) * w;
      s.zz += std::norm(z[k]);
      s.ww += std::norm(w);
    }

    if (chain_) {
      ComplexNormal noise(cfg_.channel.noise_sigma2());
      std::vector<cplx> zhat(n);
      for (std::size_t k = 0; k < n; ++k) {
        const cplx xi = noise(rng);
        zhat[k] = cfg_.qrx(cfg_.channel.apply(x[k], xi));
      }
      v.forward(zhat);
      s.rho_cross.assign(bands_, cplx{});
      s.rho_z.assign(bands_, 0.0);
      s.rho_zhat.assign(bands_, 0.0);
      for (std::size_t k = 0; k < n; ++k) {
        const auto m = static_cast<std::size_t>(assignment_[k]);
        s.rho_cross[m] += std::conj(z[k]) * zhat[k];
        s.rho_z[m] += std::norm(z[k]);
        s.rho_zhat[m] += std::norm(zhat[k]);
      }
    }
    return s;
  }

  void predict(SimReport& rep) const {
    const auto spec = predict_spectrum(cfg_.plan, rep.m_tx);
    rep.predicted_s = spec.s_m;
    rep.predicted_nu = spec.nu_m;
    rep.predicted_s_tot = spec.s_tot;
    rep.noise.predicted_noise_power = rep.m_tx.tau * cfg_.plan.pbar();
    if (chain_) {
      const double a2 = rep.m_rx->alpha_sq();
      const double tp = rep.m_rx->tau * cfg_.plan.pbar();
      for (std::size_t m = 0; m < bands_; ++m) {
        const double sig = a2 * cfg_.plan.powers()[m];
        rep.predicted_rho.push_back(sig + tp > 0.0 ? sig / (sig + tp) : 0.0);
      }
    }
  }

  void reduce(SimReport& rep, const std::vector<TrialSums>& sums) const {
    const auto trials = static_cast<double>(cfg_.trials);
    rep.empirical_s_mean.assign(bands_, 0.0);
    rep.empirical_s_stderr.assign(bands_, 0.0);
    std::vector<double> tot(cfg_.trials, 0.0);
    for (std::size_t t = 0; t < cfg_.trials; ++t) {
      for (std::size_t m = 0; m < bands_; ++m) {
        rep.empirical_s_mean[m] += sums[t].s_m[m] / trials;
        tot[t] += sums[t].s_m[m];
      }
      rep.empirical_s_tot_mean += tot[t] / trials;
      rep.max_unitarity_error = std::max(rep.max_unitarity_error, sums[t].unitarity);
      rep.max_energy_bookkeeping_error =
          std::max(rep.max_energy_bookkeeping_error, sums[t].bookkeeping);
      rep.per_trial.push_back({t, sums[t].s_m});
    }
    auto stderr_of = [&](auto value, double mean) {
      if (cfg_.trials < 2) return 0.0;
      double ss = 0.0;
      for (std::size_t t = 0; t < cfg_.trials; ++t) ss += std::pow(value(t) - mean, 2);
      return std::sqrt(ss / (trials - 1.0) / trials);
    };
    for (std::size_t m = 0; m < bands_; ++m)
      rep.empirical_s_stderr[m] =
          stderr_of([&](std::size_t t) { return sums[t].s_m[m]; }, rep.empirical_s_mean[m]);
    rep.empirical_s_tot_stderr =
        stderr_of([&](std::size_t t) { return tot[t]; }, rep.empirical_s_tot_mean);

    for (std::size_t m = 0; m < bands_; ++m) {
      rep.empirical_nu.push_back(rep.empirical_s_tot_mean > 0.0
                                     ? rep.empirical_s_mean[m] / rep.empirical_s_tot_mean
                                     : 0.0);
      const double pred = rep.predicted_s[m];
      const double diff = std::abs(rep.empirical_s_mean[m] - pred);
      rep.relative_errors.push_back(pred > 0.0 ? diff / pred : diff);
    }
    rep.s_tot_relative_error =
        rep.predicted_s_tot > 0.0
            ? std::abs(rep.empirical_s_tot_mean - rep.predicted_s_tot) / rep.predicted_s_tot
            : std::abs(rep.empirical_s_tot_mean);

    // Pooled moment diagnostics of w over all components of all trials.
    double re[4] = {0, 0, 0, 0}, im[4] = {0, 0, 0, 0}, re_im = 0.0, zz = 0.0, ww = 0.0;
    cplx zw{};
    for (const auto& s : sums) {
      for (int o = 0; o < 4; ++o) {
        re[o] += s.re[o];
        im[o] += s.im[o];
      }
      re_im += s.re_im;
      zw += s.zw;
      zz += s.zz;
      ww += s.ww;
    }
    const double count = trials * static_cast<double>(cfg_.n);
    auto excess_kurtosis = [count](const double* p) {
      const double m1 = p[0] / count, m2 = p[1] / count, m3 = p[2] / count, m4 = p[3] / count;
      const double var = m2 - m1 * m1;
      if (!(var > 0.0)) return 0.0;
      const double c4 = m4 - 4 * m1 * m3 + 6 * m1 * m1 * m2 - 3 * m1 * m1 * m1 * m1;
      return c4 / (var * var) - 3.0;
    };
    rep.noise.excess_kurtosis_re = excess_kurtosis(re);
    rep.noise.excess_kurtosis_im = excess_kurtosis(im);
    rep.noise.z_w_correlation = zz > 0.0 && ww > 0.0 ? std::abs(zw) / std::sqrt(zz * ww) : 0.0;
    {
      const double mr = re[0] / count, mi = im[0] / count;
      const double vr = re[1] / count - mr * mr, vi = im[1] / count - mi * mi;
      const double cov = re_im / count - mr * mi;
      rep.noise.iq_correlation = vr > 0.0 && vi > 0.0 ? cov / std::sqrt(vr * vi) : 0.0;
    }
    rep.noise.noise_power = ww / count;

    if (chain_) {
      for (std::size_t m = 0; m < bands_; ++m) {
        cplx cross{};
        double pz = 0.0, pzh = 0.0;
        for (const auto& s : sums) {
          cross += s.rho_cross[m];
          pz += s.rho_z[m];
          pzh += s.rho_zhat[m];
        }
        rep.empirical_rho.push_back(pz > 0.0 && pzh > 0.0 ? std::norm(cross) / (pz * pzh) : 0.0);
      }
    }
  }

  const SimConfig& cfg_;
  bool chain_;
  std::size_t bands_ = 0;
  std::vector<int> assignment_;
  std::unique_ptr<FftTransform> fft_;
  cplx alpha_tx_{};
};

}  // namespace

SimReport run_tx_trials(const SimConfig& cfg) { return Runner(cfg, false).run(); }

SimReport run_chain_trials(const SimConfig& cfg) { return Runner(cfg, true).run(); }

}  // namespace qcap
