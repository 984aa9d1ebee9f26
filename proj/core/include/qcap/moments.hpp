#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <variant>

#include "qcap/quantizer.hpp"

namespace qcap {

/// Quadrature node count per real dimension for expectations over U.
inline constexpr int kDefaultQuadratureNodes = 129;
/// Node count per real dimension for expectations over channel noise.
inline constexpr int kDefaultNoiseQuadratureNodes = 24;

/// Linear-plus-Gaussian description of a nonlinear chain driven by
/// U ~ CN(0, pbar): output = alpha * U + noise with variance tau * pbar.
struct AgnMoments {
  cplx alpha{1.0, 0.0};
  double tau = 0.0;
  double pbar = 1.0;
  /// Sampling uncertainty; zero for deterministic quadrature.
  double alpha_stderr = 0.0;
  double tau_stderr = 0.0;

  double alpha_sq() const noexcept { return std::norm(alpha); }
  /// |alpha|^2 / tau, the signal-to-distortion ratio of the chain.
  double sdr() const noexcept { return alpha_sq() / tau; }
};

/// Memoryless channel y = F(x, xi) with xi ~ CN(0, noise_sigma2).
class ChannelSpec {
 public:
  struct Awgn {
    double sigma2 = 0.0;
    cplx gain{1.0, 0.0};
  };
  struct Custom {
    std::function<cplx(cplx, cplx)> map;
    double noise_sigma2 = 0.0;
    std::string name;
  };
  using Kind = std::variant<Awgn, Custom>;

  ChannelSpec() : kind_(Awgn{}) {}

  static ChannelSpec awgn(double sigma2, cplx gain = {1.0, 0.0});
  static ChannelSpec custom(std::function<cplx(cplx, cplx)> map,
                            double noise_sigma2, std::string name = "custom");

  const Kind& kind() const noexcept { return kind_; }
  double noise_sigma2() const noexcept;
  cplx apply(cplx x, cplx xi) const;

 private:
  explicit ChannelSpec(Kind kind) : kind_(std::move(kind)) {}
  Kind kind_;
};

struct QuadratureMethod {
  int nodes = kDefaultQuadratureNodes;
  int noise_nodes = kDefaultNoiseQuadratureNodes;
};

struct MonteCarloMethod {
  std::uint64_t samples = 1'000'000;
  std::uint64_t seed = 1;
};

using MomentMethod = std::variant<QuadratureMethod, MonteCarloMethod>;

/// (alpha, tau) of the transmit quantizer alone:
///   alpha = E[Q(U) conj(U)] / pbar,  tau = E|Q(U) - alpha U|^2 / pbar.
/// Step quantizers use exact Gaussian cell integrals; alpha is exactly real
/// for them.
AgnMoments tx_moments(const QuantizerSpec& q, double pbar,
                      const MomentMethod& method = QuadratureMethod{});

/// (alpha, tau) of S = Q_rx(F(Q_tx(U), Xi)) with U independent of Xi.
AgnMoments chain_moments(const QuantizerSpec& qtx, const ChannelSpec& ch,
                         const QuantizerSpec& qrx, double pbar,
                         const MomentMethod& method = QuadratureMethod{});

/// Raw second-order statistics of a chain output, for identity checks.
struct ChainStatistics {
  cplx cross;           ///< E[S conj(U)]
  double output_power;  ///< E|S|^2
  double input_power;   ///< E|U|^2 as integrated by the rule
};

/// Plain tensor Gauss–Hermite over both real dimensions of U (and of the
/// noise), with no closed-form shortcuts. Slow convergence for step maps;
/// intended as an independent cross-check.
ChainStatistics chain_statistics_tensor(const QuantizerSpec& qtx,
                                        const ChannelSpec& ch,
                                        const QuantizerSpec& qrx, double pbar,
                                        int nodes, int noise_nodes);

AgnMoments moments_from_statistics(const ChainStatistics& st, double pbar);

}  // namespace qcap
