#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "qcap/analysis.hpp"
#include "qcap/errors.hpp"

using qcap::AgnMoments;
using qcap::QuantizerSpec;
using qcap::SubbandPlan;

namespace {

const double kPi = std::numbers::pi;

AgnMoments one_bit() { return qcap::tx_moments(QuantizerSpec::uniform_midrise(1, 1.0), 1.0); }

AgnMoments identity(double pbar = 1.0) {
  return qcap::tx_moments(QuantizerSpec::identity(), pbar);
}

}  // namespace

TEST(SubbandPlan, DerivesAverageEnergy) {
  const SubbandPlan p({0.25, 0.75}, {2.0, 1.0});
  EXPECT_DOUBLE_EQ(p.pbar(), 1.25);
}

TEST(SubbandPlan, RejectsInvalid) {
  EXPECT_THROW(SubbandPlan({0.5, 0.4}, {1, 1}), qcap::ContractError);
  EXPECT_THROW(SubbandPlan({0.5, 0.5}, {1}), qcap::ContractError);
  EXPECT_THROW(SubbandPlan({1.0, 0.0}, {1, 1}), qcap::ContractError);
  EXPECT_THROW(SubbandPlan({0.5, 0.5}, {1, -1}), qcap::ContractError);
  EXPECT_THROW(SubbandPlan({0.5, 0.5}, {0, 0}), qcap::ContractError);
}

TEST(Spectrum, IdentityQuantizer) {
  const SubbandPlan p({0.2, 0.3, 0.5}, {3.0, 1.0, 0.2});
  const auto s = qcap::predict_spectrum(p, identity(p.pbar()));
  for (std::size_t m = 0; m < 3; ++m) EXPECT_NEAR(s.s_m[m], p.deltas()[m] * p.powers()[m], 1e-12);
  EXPECT_NEAR(s.s_tot, p.pbar(), 1e-12);
}

TEST(Spectrum, OneBitTwoBand) {
  const auto s = qcap::predict_spectrum(SubbandPlan({0.5, 0.5}, {2.0, 0.0}), one_bit());
  // s_1 = 0.5 (4/pi * 2 + tau), s_2 = 0.5 tau with tau = 2 - 4/pi
  const double tau = 2.0 - 4.0 / kPi;
  EXPECT_NEAR(s.s_m[0], 0.5 * (8.0 / kPi + tau), 1e-12);
  EXPECT_NEAR(s.s_m[1], 0.5 * tau, 1e-12);
  EXPECT_NEAR(s.s_m[0], 1.6366, 1e-4);
  EXPECT_NEAR(s.s_m[1], 0.3634, 1e-4);
  EXPECT_NEAR(s.s_tot, 2.0, 1e-12);
  EXPECT_NEAR(s.nu_m[0], 0.8183, 1e-4);
  EXPECT_NEAR(s.nu_min_m[1], 0.5 * tau / 2.0, 1e-12);
}

TEST(Spectrum, FlatAllocationGivesDeltas) {
  const auto s = qcap::predict_spectrum(SubbandPlan({0.5, 0.5}, {1.0, 1.0}), one_bit());
  EXPECT_NEAR(s.nu_m[0], 0.5, 1e-12);
  EXPECT_NEAR(s.nu_m[1], 0.5, 1e-12);
}

TEST(Spectrum, PowerMismatchIsContractError) {
  EXPECT_THROW(qcap::predict_spectrum(SubbandPlan({0.5, 0.5}, {4.0, 0.0}), one_bit()),
               qcap::ContractError);
}

TEST(Spectrum, ConservationOverRandomPlans) {
  std::mt19937_64 eng(1);
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t m = 2 + trial % 4;
    std::vector<double> d(m), p(m);
    double sum = 0.0;
    for (auto& v : d) sum += (v = 0.05 + ud(eng));
    for (auto& v : d) v /= sum;
    for (auto& v : p) v = 3.0 * ud(eng);
    const SubbandPlan plan(d, p);
    const auto mt = qcap::tx_moments(QuantizerSpec::uniform_midrise_loaded(2, plan.pbar()), plan.pbar());
    const auto s = qcap::predict_spectrum(plan, mt);
    double tot = 0.0, nu = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      tot += s.s_m[i];
      nu += s.nu_m[i];
      EXPECT_GE(s.s_m[i], 0.0);
    }
    EXPECT_NEAR(tot / s.s_tot, 1.0, 1e-10);
    EXPECT_NEAR(nu, 1.0, 1e-12);
    EXPECT_NEAR(s.s_tot, (mt.alpha_sq() + mt.tau) * plan.pbar(), 1e-12);
  }
}

TEST(Feasibility, Examples) {
  const std::vector<double> d = {0.5, 0.5};
  EXPECT_TRUE(qcap::feasible_fractions(d, identity(), std::vector<double>{0.99, 0.01}));
  EXPECT_FALSE(qcap::feasible_fractions(d, one_bit(), std::vector<double>{0.9, 0.1}));
  const auto floor = qcap::feasibility_floors(d, one_bit());
  EXPECT_NEAR(floor[1], 0.18169, 1e-5);
  const auto s = qcap::predict_spectrum(SubbandPlan(d, {2.0, 0.0}), one_bit());
  EXPECT_TRUE(qcap::feasible_fractions(d, one_bit(), s.nu_m));
}

TEST(Feasibility, RejectsMalformedFractions) {
  const std::vector<double> d = {0.5, 0.5};
  EXPECT_THROW(qcap::feasible_fractions(d, one_bit(), std::vector<double>{0.6, 0.6}),
               qcap::ContractError);
  EXPECT_THROW(qcap::feasible_fractions(d, one_bit(), std::vector<double>{1.1, -0.1}),
               qcap::ContractError);
  EXPECT_THROW(qcap::feasible_fractions(d, one_bit(), std::vector<double>{1.0}),
               qcap::ContractError);
}

TEST(PowersFromFractions, Examples) {
  const std::vector<double> d = {0.5, 0.5};
  const auto id = qcap::powers_from_fractions(d, identity(), 1.0, d);
  EXPECT_NEAR(id[0], 1.0, 1e-12);
  EXPECT_NEAR(id[1], 1.0, 1e-12);
  const auto flat = qcap::powers_from_fractions(d, one_bit(), 1.0, d);
  EXPECT_NEAR(flat[0], 1.0, 1e-12);
  EXPECT_NEAR(flat[1], 1.0, 1e-12);
  const auto s = qcap::predict_spectrum(SubbandPlan(d, {2.0, 0.0}), one_bit());
  const auto back = qcap::powers_from_fractions(d, one_bit(), 1.0, s.nu_m);
  EXPECT_NEAR(back[0], 2.0, 1e-10);
  EXPECT_NEAR(back[1], 0.0, 1e-10);
  EXPECT_GE(back[1], 0.0);
}

TEST(PowersFromFractions, InfeasibleCarriesFloor) {
  const std::vector<double> d = {0.5, 0.5};
  try {
    qcap::powers_from_fractions(d, one_bit(), 1.0, std::vector<double>{0.9, 0.1});
    FAIL() << "expected FeasibilityError";
  } catch (const qcap::FeasibilityError& e) {
    EXPECT_EQ(e.band(), 1u);
    EXPECT_NEAR(e.floor(), 0.18169, 1e-5);
    EXPECT_DOUBLE_EQ(e.value(), 0.1);
  }
}

TEST(PowersFromFractions, RoundTripAndFloorSharpness) {
  std::mt19937_64 eng(3);
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  const auto mt = one_bit();
  for (int t = 0; t < 100; ++t) {
    std::vector<double> d = {0.2 + 0.6 * ud(eng), 0.0};
    d[1] = 1.0 - d[0];
    const double nu2 = ud(eng);
    const std::vector<double> nu = {1.0 - nu2, nu2};
    const auto floors = qcap::feasibility_floors(d, mt);
    const bool feasible = qcap::feasible_fractions(d, mt, nu);
    EXPECT_EQ(feasible, nu[0] >= floors[0] && nu[1] >= floors[1]);
    if (!feasible) {
      EXPECT_THROW(qcap::powers_from_fractions(d, mt, 1.0, nu), qcap::FeasibilityError);
      continue;
    }
    const auto p = qcap::powers_from_fractions(d, mt, 1.0, nu);
    EXPECT_GE(p[0], 0.0);
    EXPECT_GE(p[1], 0.0);
    const auto s = qcap::predict_spectrum(SubbandPlan(d, p), mt);
    EXPECT_NEAR(s.nu_m[0], nu[0], 1e-10);
    EXPECT_NEAR(s.nu_m[1], nu[1], 1e-10);
  }
}

TEST(LinearRate, IdentityOverAwgnIsShannon) {
  const auto r = qcap::awgn_linear_rate(SubbandPlan({1.0}, {3.0}), identity(3.0), 0.5);
  EXPECT_NEAR(r.r_lin, std::log2(1.0 + 3.0 / 0.5), 1e-12);
  const auto one = qcap::awgn_linear_rate(SubbandPlan({1.0}, {1.0}), identity(), 1.0);
  EXPECT_NEAR(one.r_lin, 1.0, 1e-12);
  EXPECT_EQ(one.regime, qcap::RateRegime::awgn);
}

TEST(LinearRate, OneBitNoiseless) {
  const auto r = qcap::linear_rate(SubbandPlan({1.0}, {1.0}), one_bit());
  EXPECT_NEAR(r.r_lin, std::log2(1.0 + 2.0 / (kPi - 2.0)), 1e-11);
  EXPECT_NEAR(r.r_lin, 1.46045, 1e-5);
  const auto a = qcap::awgn_linear_rate(SubbandPlan({1.0}, {1.0}), one_bit(), 0.0);
  EXPECT_NEAR(a.r_lin, r.r_lin, 1e-14);
}

TEST(LinearRate, NoiselessIdentityIsInfinite) {
  EXPECT_THROW(qcap::linear_rate(SubbandPlan({1.0}, {1.0}), identity()), qcap::InfiniteRateError);
}

TEST(LinearRate, ZeroPowerBandsContributeNothing) {
  const auto r = qcap::awgn_linear_rate(SubbandPlan({0.5, 0.25, 0.25}, {4.0, 0.0, 0.0}),
                                        identity(2.0), 1.0);
  EXPECT_EQ(r.per_band_terms[1], 0.0);
  EXPECT_EQ(r.per_band_terms[2], 0.0);
  EXPECT_NEAR(r.r_lin, r.per_band_terms[0], 1e-15);
}

TEST(LinearRate, TermsSumAndMonotonicity) {
  const auto mt = qcap::tx_moments(QuantizerSpec::uniform_midrise_loaded(2, 1.0), 1.0);
  const SubbandPlan plan({0.3, 0.7}, {2.0, 4.0 / 7.0});
  double prev = INFINITY;
  for (double s2 : {0.0, 0.01, 0.1, 1.0, 10.0, 100.0, 1e4}) {
    const auto r = qcap::awgn_linear_rate(plan, mt, s2);
    double sum = 0.0;
    for (double t : r.per_band_terms) {
      EXPECT_GE(t, 0.0);
      sum += t;
    }
    EXPECT_NEAR(sum, r.r_lin, 1e-12);
    EXPECT_LE(r.r_lin, prev);
    prev = r.r_lin;
  }
  EXPECT_LT(prev, 1e-3);
}

TEST(LinearRate, NondecreasingInBandPower) {
  const auto id_rate = [](double p1) {
    const SubbandPlan plan({0.5, 0.5}, {p1, 1.0});
    return qcap::awgn_linear_rate(plan, identity(plan.pbar()), 0.5).r_lin;
  };
  double prev = -1.0;
  for (double p1 : {0.0, 0.5, 1.0, 2.0, 4.0}) {
    const double r = id_rate(p1);
    EXPECT_GE(r, prev);
    prev = r;
  }
}

TEST(NoiseFreeRate, Examples) {
  const std::vector<double> d = {0.5, 0.5};
  const auto flat = qcap::noise_free_rate(d, one_bit(), d);
  EXPECT_NEAR(flat.r_lin, std::log2(1.0 + 2.0 / (kPi - 2.0)), 1e-11);
  EXPECT_NEAR(flat.kl_term, 0.0, 1e-15);
  const auto s = qcap::predict_spectrum(SubbandPlan(d, {2.0, 0.0}), one_bit());
  const auto edge = qcap::noise_free_rate(d, one_bit(), s.nu_m);
  EXPECT_NEAR(edge.kl_term, oracle::kl_bits(d, s.nu_m), 1e-12);
  // Quoted reference figures use nu rounded to four digits.
  EXPECT_NEAR(edge.kl_term, 0.37473, 5e-4);
  EXPECT_NEAR(edge.r_lin, 1.08575, 5e-4);
  const auto direct = qcap::awgn_linear_rate(SubbandPlan(d, {2.0, 0.0}), one_bit(), 0.0);
  EXPECT_NEAR(edge.r_lin, direct.r_lin, 1e-9);
  EXPECT_EQ(edge.regime, qcap::RateRegime::noise_free);
}

TEST(NoiseFreeRate, Errors) {
  const std::vector<double> d = {0.5, 0.5};
  EXPECT_THROW(qcap::noise_free_rate(d, one_bit(), std::vector<double>{1.0, 0.0}),
               qcap::FeasibilityError);
  EXPECT_THROW(qcap::noise_free_rate(d, identity(), d), qcap::InfiniteRateError);
}

TEST(Kl, Examples) {
  const std::vector<double> h = {0.5, 0.5};
  EXPECT_EQ(qcap::kl_divergence(h, h), 0.0);
  EXPECT_NEAR(qcap::kl_divergence(h, std::vector<double>{0.9, 0.1}), 0.73697, 1e-5);
  EXPECT_NEAR(qcap::kl_divergence(std::vector<double>{1.0, 0.0}, h), 1.0, 1e-15);
  EXPECT_TRUE(std::isinf(qcap::kl_divergence(h, std::vector<double>{1.0, 0.0})));
}

TEST(Feasibility, MaxAclrOneBit) {
  const double aclr = qcap::max_feasible_aclr_db(std::vector<double>{0.5, 0.5}, one_bit());
  const double tau = 2.0 - 4.0 / kPi;
  const double nu2 = 0.25 * tau;
  EXPECT_NEAR(aclr, 10.0 * std::log10((1.0 - nu2) / nu2), 1e-12);
  EXPECT_NEAR(aclr, 6.536, 1e-3);
}
