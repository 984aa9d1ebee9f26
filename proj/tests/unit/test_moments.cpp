#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "qcap/errors.hpp"
#include "qcap/gauss_hermite.hpp"
#include "qcap/moments.hpp"

using qcap::ChannelSpec;
using qcap::cplx;
using qcap::QuantizerSpec;

namespace {
const double kPi = std::numbers::pi;
}

TEST(GaussHermite, IntegratesPolynomialsExactly) {
  const auto rule = qcap::gauss_hermite(20);
  // int x^{2k} e^{-x^2} dx = Gamma(k + 1/2)
  for (int k = 0; k < 20; ++k) {
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
      acc += rule.weights[i] * std::pow(rule.nodes[i], 2 * k);
    EXPECT_NEAR(acc / std::tgamma(k + 0.5), 1.0, 1e-12) << "k=" << k;
  }
}

TEST(GaussHermite, LargeRuleIsAccurate) {
  const auto rule = qcap::gaussian_expectation_rule(129, 0.5);
  double w = 0.0, m2 = 0.0, m4 = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    w += rule.weights[i];
    m2 += rule.weights[i] * rule.nodes[i] * rule.nodes[i];
    m4 += rule.weights[i] * std::pow(rule.nodes[i], 4);
  }
  EXPECT_NEAR(w, 1.0, 1e-13);
  EXPECT_NEAR(m2, 0.5, 1e-13);
  EXPECT_NEAR(m4, 3 * 0.25, 1e-12);
}

TEST(TxMoments, OneBitClosedForm) {
  const auto m = qcap::tx_moments(QuantizerSpec::uniform_midrise(1, 1.0), 1.0);
  EXPECT_NEAR(m.alpha.real(), 2.0 / std::sqrt(kPi), 1e-12);
  EXPECT_EQ(m.alpha.imag(), 0.0);
  EXPECT_NEAR(m.tau, 2.0 - 4.0 / kPi, 1e-12);
  EXPECT_NEAR(m.sdr(), 2.0 / (kPi - 2.0), 1e-11);
}

TEST(TxMoments, OneBitClosedFormAnyPower) {
  // alpha = c sqrt(2/pi) / sigma_dim / ... : E|Re U| = sigma sqrt(2/pi), sigma^2 = P/2
  for (double p : {0.1, 1.0, 7.0}) {
    const double c = 0.8;
    const auto m = qcap::tx_moments(QuantizerSpec::uniform_midrise(1, c), p);
    const double sigma = std::sqrt(p / 2.0);
    const double alpha = 2.0 * c * sigma * std::sqrt(2.0 / kPi) / p;
    EXPECT_NEAR(m.alpha.real(), alpha, 1e-12);
    EXPECT_NEAR(m.tau, 2.0 * c * c / p - alpha * alpha, 1e-12);
  }
}

TEST(TxMoments, ThreeBitMatchesMonteCarloOracle) {
  const auto q = QuantizerSpec::uniform_midrise(3, 2.6);
  const auto m = qcap::tx_moments(q, 1.0);
  const auto ref = oracle::monte_carlo_moments([&](cplx u) { return q(u); }, 1.0, 10'000'000, 42);
  EXPECT_NEAR(m.alpha.real() / ref.alpha.real(), 1.0, 5e-4);
  EXPECT_NEAR(m.tau / ref.tau, 1.0, 5e-3);
  EXPECT_LT(std::abs(m.alpha.real() - ref.alpha.real()), 4 * ref.alpha_se);
  EXPECT_LT(std::abs(m.tau - ref.tau), 4 * ref.tau_se);
}

TEST(TxMoments, IdentityHasUnitGainNoNoise) {
  for (double p : {0.5, 1.0, 3.0}) {
    const auto m = qcap::tx_moments(QuantizerSpec::identity(), p);
    EXPECT_NEAR(m.alpha.real(), 1.0, 1e-12);
    EXPECT_NEAR(m.tau, 0.0, 1e-12);
  }
}

TEST(TxMoments, MonteCarloPathWithinThreeSigma) {
  for (int b : {1, 2, 4}) {
    const auto q = QuantizerSpec::uniform_midrise_loaded(b, 1.0);
    const auto quad = qcap::tx_moments(q, 1.0);
    const auto mc = qcap::tx_moments(q, 1.0, qcap::MonteCarloMethod{1'000'000, 5});
    EXPECT_GT(mc.alpha_stderr, 0.0);
    EXPECT_GT(mc.tau_stderr, 0.0);
    EXPECT_LT(std::abs(mc.alpha.real() - quad.alpha.real()), 3 * mc.alpha_stderr) << b;
    EXPECT_LT(std::abs(mc.tau - quad.tau), 3 * mc.tau_stderr) << b;
  }
}

TEST(TxMoments, MonteCarloIsDeterministic) {
  const auto q = QuantizerSpec::uniform_midrise(2, 1.0);
  const auto a = qcap::tx_moments(q, 1.0, qcap::MonteCarloMethod{100'000, 9});
  const auto b = qcap::tx_moments(q, 1.0, qcap::MonteCarloMethod{100'000, 9});
  EXPECT_EQ(a.alpha, b.alpha);
  EXPECT_EQ(a.tau, b.tau);
}

TEST(TxMoments, RejectsBadPower) {
  EXPECT_THROW(qcap::tx_moments(QuantizerSpec::identity(), 0.0), qcap::ContractError);
  EXPECT_THROW(qcap::tx_moments(QuantizerSpec::identity(), -1.0), qcap::ContractError);
  EXPECT_THROW(qcap::tx_moments(QuantizerSpec::identity(), NAN), qcap::ContractError);
}

TEST(ChainMoments, SecondOneBitStageIsIdempotent) {
  const auto q = QuantizerSpec::uniform_midrise(1, 1.0);
  const auto chain = qcap::chain_moments(q, ChannelSpec::awgn(0.0), q, 1.0);
  const auto tx = qcap::tx_moments(q, 1.0);
  EXPECT_NEAR(chain.alpha.real(), tx.alpha.real(), 1e-12);
  EXPECT_NEAR(chain.tau, tx.tau, 1e-12);
}

TEST(ChainMoments, AwgnShortcut) {
  for (int b = 1; b <= 6; ++b) {
    const auto q = QuantizerSpec::uniform_midrise_loaded(b, 1.0);
    const auto tx = qcap::tx_moments(q, 1.0);
    for (double s2 : {0.1, 1.0, 10.0}) {
      const auto rx = qcap::chain_moments(q, ChannelSpec::awgn(s2), QuantizerSpec::identity(), 1.0);
      EXPECT_NEAR(rx.alpha.real(), tx.alpha.real(), 1e-6);
      EXPECT_NEAR(rx.tau, tx.tau + s2, 1e-6);
    }
  }
}

TEST(ChainMoments, IdentityChainOverAwgn) {
  const auto m = qcap::chain_moments(QuantizerSpec::identity(), ChannelSpec::awgn(0.5),
                                     QuantizerSpec::identity(), 2.0);
  EXPECT_NEAR(m.alpha.real(), 1.0, 1e-9);
  EXPECT_NEAR(m.tau, 0.25, 1e-9);
}

TEST(ChainMoments, AdcAfterNoiseMatchesMonteCarloOracle) {
  const auto qtx = QuantizerSpec::uniform_midrise_loaded(2, 1.0);
  const auto qrx = QuantizerSpec::uniform_midrise(1, 1.0);
  const auto m = qcap::chain_moments(qtx, ChannelSpec::awgn(0.3), qrx, 1.0);
  std::mt19937_64 noise_eng(3);
  std::normal_distribution<double> nd(0.0, std::sqrt(0.15));
  const auto ref = oracle::monte_carlo_moments(
      [&](cplx u) { return qrx(qtx(u) + cplx(nd(noise_eng), nd(noise_eng))); }, 1.0, 2'000'000, 8);
  EXPECT_LT(std::abs(m.alpha.real() - ref.alpha.real()), 4 * ref.alpha_se + 1e-4);
  EXPECT_LT(std::abs(m.tau - ref.tau), 4 * ref.tau_se + 1e-4);
}

TEST(ChainMoments, TensorQuadratureCrossCheck) {
  // Smooth chain, where tensor Gauss-Hermite converges fast.
  const auto soft = [](cplx x, cplx xi) { return (x + xi) / std::sqrt(1.0 + std::norm(x + xi)); };
  const auto ch = ChannelSpec::custom(soft, 0.2);
  const auto id = QuantizerSpec::identity();
  const auto st = qcap::chain_statistics_tensor(id, ch, id, 1.0, 60, 24);
  const auto m = qcap::moments_from_statistics(st, 1.0);
  EXPECT_NEAR(st.input_power, 1.0, 1e-10);
  std::mt19937_64 noise_eng(5);
  std::normal_distribution<double> nd(0.0, std::sqrt(0.1));
  const auto ref = oracle::monte_carlo_moments(
      [&](cplx u) { return soft(u, cplx(nd(noise_eng), nd(noise_eng))); }, 1.0, 2'000'000, 9);
  EXPECT_LT(std::abs(m.alpha.real() - ref.alpha.real()), 4 * ref.alpha_se + 1e-4);
  EXPECT_LT(std::abs(m.tau - ref.tau), 4 * ref.tau_se + 1e-4);
  const auto general = qcap::chain_moments(id, ch, id, 1.0);
  EXPECT_NEAR(general.alpha.real(), m.alpha.real(), 1e-6);
  EXPECT_NEAR(general.tau, m.tau, 1e-6);
}

TEST(ChainMoments, CustomChannelAgreesWithAwgn) {
  const auto q = QuantizerSpec::uniform_midrise_loaded(2, 1.0);
  const auto ref = qcap::chain_moments(q, ChannelSpec::awgn(0.5), q, 1.0);
  const auto custom = qcap::chain_moments(
      q, ChannelSpec::custom([](cplx x, cplx xi) { return x + xi; }, 0.5), q, 1.0);
  EXPECT_NEAR(custom.alpha.real(), ref.alpha.real(), 2e-3);
  EXPECT_NEAR(custom.tau, ref.tau, 2e-3);
}

TEST(ChainMoments, ScaleCovariance) {
  const auto a = qcap::chain_moments(QuantizerSpec::uniform_midrise(3, 1.3), ChannelSpec::awgn(0.2),
                                     QuantizerSpec::uniform_midrise(2, 1.0), 1.0);
  const auto b = qcap::chain_moments(QuantizerSpec::uniform_midrise(3, 2.6), ChannelSpec::awgn(0.8),
                                     QuantizerSpec::uniform_midrise(2, 2.0), 4.0);
  EXPECT_NEAR(a.alpha.real(), b.alpha.real(), 1e-10);
  EXPECT_NEAR(a.tau, b.tau, 1e-10);
}

TEST(ChainMoments, PhaseRotatingChannelGivesComplexAlpha) {
  const cplx g = std::polar(1.0, 0.7);
  const auto m = qcap::chain_moments(QuantizerSpec::identity(), ChannelSpec::awgn(0.0, g),
                                     QuantizerSpec::identity(), 1.0);
  EXPECT_NEAR(std::abs(m.alpha - g), 0.0, 1e-9);
  EXPECT_NEAR(m.tau, 0.0, 1e-9);
}
