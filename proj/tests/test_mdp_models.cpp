#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "bcp/mdp_models.hpp"
#include "bcp/rng.hpp"
#include "oracles.hpp"

using namespace bcp;

namespace {

std::vector<int> bits(std::initializer_list<int> b) { return std::vector<int>(b); }

}  // namespace

TEST(SimMdp, FeatureLayoutAndNorm) {
  const auto m = build_sim_mdp(0.99, bits({0, 1, 1}), 100);
  EXPECT_EQ(m.dim(), 10);
  EXPECT_EQ(m.num_states(), 2);
  for (int h = 0; h < 3; ++h)
    for (int s = 0; s < 2; ++s)
      for (int a = 0; a < 100; ++a) {
        const auto& phi = m.feature(h, s, a);
        for (int bit = 0; bit < 8; ++bit) EXPECT_EQ(phi[bit], ((a >> bit) & 1) ? 1.0 : -1.0);
        const double delta = ((s == 0) == (a == 0)) ? 1.0 : 0.0;
        EXPECT_EQ(phi[8], delta);
        EXPECT_EQ(phi[9], 1.0 - delta);
        EXPECT_DOUBLE_EQ(phi.norm(), 3.0);
      }
}

TEST(SimMdp, RewardsAndTransitionsFollowXorPattern) {
  const std::vector<int> alpha = bits({0, 1, 0, 1, 1});
  const double r = 0.7;
  const auto m = build_sim_mdp(r, alpha, 5);
  for (int h = 0; h < 5; ++h)
    for (int s = 0; s < 2; ++s)
      for (int a = 0; a < 5; ++a) {
        const int delta = (s == 0) == (a == 0);
        EXPECT_NEAR(m.reward(h, s, a), delta ? r : 1.0 - r, 1e-15);
        const int next = alpha[h] ^ (1 - delta);
        EXPECT_NEAR(m.transition(h, s, a)[next], 1.0, 1e-15);
        EXPECT_NEAR(m.transition(h, s, a)[1 - next], 0.0, 1e-15);
      }
}

TEST(SimMdp, LinearStructureReproducesModel) {
  for (bool normalize : {false, true}) {
    const auto m = build_sim_mdp(0.99, bits({1, 0, 1, 1}), 7, {InitialState::kUniform, normalize});
    for (int h = 0; h < 4; ++h)
      for (int s = 0; s < 2; ++s)
        for (int a = 0; a < 7; ++a) {
          const auto& phi = m.feature(h, s, a);
          EXPECT_NEAR(phi.dot(m.theta(h)), m.reward(h, s, a), 1e-12);
          const Eigen::VectorXd p = m.nu(h) * phi;
          for (int sp = 0; sp < 2; ++sp) EXPECT_NEAR(p[sp], m.transition(h, s, a)[sp], 1e-12);
          if (normalize) EXPECT_NEAR(phi.norm(), 1.0, 1e-12);
        }
  }
}

TEST(SimMdp, InitialStateOptions) {
  const auto u = build_sim_mdp(0.99, bits({0, 0}), 4);
  EXPECT_EQ(u.initial_dist()[0], 0.5);
  EXPECT_EQ(u.initial_dist()[1], 0.5);
  const auto z = build_sim_mdp(0.99, bits({0, 0}), 4, {InitialState::kPointMassZero, false});
  EXPECT_EQ(z.initial_dist()[0], 1.0);
  EXPECT_EQ(z.initial_dist()[1], 0.0);
}

TEST(SimMdp, RejectsBadParameters) {
  EXPECT_THROW(build_sim_mdp(1.0, bits({0}), 4), std::invalid_argument);
  EXPECT_THROW(build_sim_mdp(0.5, bits({0}), 1), std::invalid_argument);
  EXPECT_THROW(build_sim_mdp(0.5, bits({0}), 257), std::invalid_argument);
  EXPECT_THROW(build_sim_mdp(0.5, bits({2}), 4), std::invalid_argument);
  EXPECT_THROW(build_sim_mdp(0.5, {}, 4), std::invalid_argument);
}

TEST(SimMdp, RandomAlphaIsSeededBits) {
  const auto a = random_alpha(64, 11);
  EXPECT_EQ(a, random_alpha(64, 11));
  EXPECT_NE(a, random_alpha(64, 12));
  int ones = 0;
  for (int b : a) {
    ASSERT_TRUE(b == 0 || b == 1);
    ones += b;
  }
  EXPECT_GT(ones, 10);
  EXPECT_LT(ones, 54);
}

TEST(HardMdp, Structure) {
  const auto m = build_hard_mdp(0.6, 0.4, 10, 4);
  EXPECT_EQ(m.num_states(), 3);
  EXPECT_EQ(m.dim(), 12);
  EXPECT_NEAR(m.transition(0, kX0, 0)[kX1], 0.6, 1e-15);
  EXPECT_NEAR(m.transition(0, kX0, 1)[kX1], 0.4, 1e-15);
  EXPECT_NEAR(m.transition(0, kX0, 2)[kX1], 0.4, 1e-15);
  EXPECT_NEAR(m.transition(0, kX0, 3)[kX2], 0.6, 1e-15);
  for (int h = 0; h < 10; ++h)
    for (int a = 0; a < 4; ++a) {
      EXPECT_EQ(m.transition(h, kX1, a)[kX1], 1.0);
      EXPECT_EQ(m.transition(h, kX2, a)[kX2], 1.0);
      EXPECT_EQ(m.reward(h, kX1, a), h >= 1 ? 1.0 : 0.0);
      EXPECT_EQ(m.reward(h, kX2, a), 0.0);
      EXPECT_EQ(m.reward(h, kX0, a), 0.0);
    }
  EXPECT_EQ(m.initial_dist()[kX0], 1.0);
  EXPECT_THROW(build_hard_mdp(0.5, 0.5, 10), std::invalid_argument);
  EXPECT_THROW(build_hard_mdp(0.6, 0.4, 1), std::invalid_argument);
}

TEST(TabularLinearMdp, SanitizesRoundoffAndRejectsInvalidRows) {
  // Row with a -1e-13 entry: clamped and renormalized.
  std::vector<double> P{1.0 + 1e-13, -1e-13, 0.5, 0.5};
  const auto m = make_one_hot_mdp(1, 2, 1, P, {0.2, 0.3}, {1.0, 0.0});
  EXPECT_EQ(m.transition(0, 0, 0)[1], 0.0);
  EXPECT_NEAR(m.transition(0, 0, 0)[0], 1.0, 1e-15);

  EXPECT_THROW(make_one_hot_mdp(1, 2, 1, {1.1, -0.1, 0.5, 0.5}, {0.2, 0.3}, {1.0, 0.0}), ModelError);
  EXPECT_THROW(make_one_hot_mdp(1, 2, 1, {0.9, 0.0, 0.5, 0.5}, {0.2, 0.3}, {1.0, 0.0}), ModelError);
  EXPECT_THROW(make_one_hot_mdp(1, 2, 1, {1.0, 0.0, 0.5, 0.5}, {1.2, 0.3}, {1.0, 0.0}), ModelError);
  EXPECT_THROW(make_one_hot_mdp(1, 2, 1, {1.0, 0.0, 0.5, 0.5}, {0.2, 0.3}, {0.7, 0.0}), ModelError);
}

TEST(Mixture, ReconstructsTransitionsExactly) {
  std::mt19937_64 g(3);
  for (int trial = 0; trial < 5; ++trial) {
    const int S = 2 + trial % 4;
    const auto base = oracle::random_mdp(g, 3, S, 2);
    const auto mix = as_mixture(base);
    EXPECT_EQ(mix.dim(), S * 2 * S);
    for (int h = 0; h < 3; ++h)
      for (int s = 0; s < S; ++s)
        for (int a = 0; a < 2; ++a)
          for (int sp = 0; sp < S; ++sp) {
            EXPECT_EQ(mix.basis(h, s, a, sp).dot(mix.w_star(h)), base.transition(h, s, a)[sp]);
            EXPECT_NEAR(mix.transition(h, s, a)[sp], base.transition(h, s, a)[sp], 1e-15);
          }
    for (int h = 0; h < 3; ++h) EXPECT_LE(mix.w_star(h).norm(), mix.c_w() + 1e-12);
  }
}

// ||phi_V|| is convex in V, so its max over [0,1]^S sits on a vertex.
TEST(Mixture, FoldedFeatureNormAtMostOneOnCube) {
  for (int S : {2, 3, 4, 5, 7}) {
    std::mt19937_64 g(S);
    const auto mix = as_mixture(oracle::random_mdp(g, 2, S, 2));
    for (int h = 0; h < 2; ++h)
      for (int s = 0; s < S; ++s)
        for (int a = 0; a < 2; ++a)
          for (int mask = 0; mask < (1 << S); ++mask) {
            std::vector<double> v(S);
            for (int i = 0; i < S; ++i) v[i] = (mask >> i) & 1;
            const Eigen::VectorXd x = phi_v(mix, v, h, s, a);
            EXPECT_LE(x.norm(), 1.0 + 1e-12);
            Eigen::VectorXd direct = Eigen::VectorXd::Zero(mix.dim());
            for (int sp = 0; sp < S; ++sp) direct += mix.basis(h, s, a, sp) * v[sp];
            EXPECT_LE((x - direct).norm(), 1e-15);
          }
  }
}

TEST(Serialization, LinearRoundTrip) {
  const auto m = build_sim_mdp(0.99, bits({1, 0, 1}), 6, {InitialState::kUniform, true});
  const json doc = json::parse(dump_json(to_json(m)));
  EXPECT_EQ(doc.at("version"), "mdp/v1");
  const auto back = linear_mdp_from_json(doc);
  ASSERT_EQ(back.horizon(), 3);
  for (int h = 0; h < 3; ++h)
    for (int s = 0; s < 2; ++s)
      for (int a = 0; a < 6; ++a) {
        EXPECT_EQ(back.feature(h, s, a), m.feature(h, s, a));
        EXPECT_EQ(back.reward(h, s, a), m.reward(h, s, a));
        for (int sp = 0; sp < 2; ++sp) EXPECT_EQ(back.transition(h, s, a)[sp], m.transition(h, s, a)[sp]);
      }
}

TEST(Serialization, MixtureRoundTripAndVersionCheck) {
  const auto mix = as_mixture(build_hard_mdp(0.6, 0.4, 4));
  const json doc = json::parse(dump_json(to_json(mix)));
  const auto back = mixture_mdp_from_json(doc);
  EXPECT_EQ(back.dim(), mix.dim());
  EXPECT_EQ(back.c_w(), mix.c_w());
  for (int h = 0; h < 4; ++h) EXPECT_EQ(back.w_star(h), mix.w_star(h));

  json bad = doc;
  bad["version"] = "mdp/v0";
  EXPECT_THROW(mixture_mdp_from_json(bad), ParseError);
  EXPECT_THROW(linear_mdp_from_json(doc), ParseError);
}

TEST(Rng, DeterministicStreamsAndCategoricalSupport) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
  Rng s0 = Rng::stream(7, 0), s1 = Rng::stream(7, 1);
  EXPECT_NE(s0.next_u64(), s1.next_u64());

  Rng r(5);
  const std::vector<double> p{0.0, 0.25, 0.0, 0.75, 0.0};
  std::vector<int> counts(5, 0);
  for (int i = 0; i < 20000; ++i) ++counts[r.categorical(p)];
  EXPECT_EQ(counts[0] + counts[2] + counts[4], 0);
  EXPECT_NEAR(counts[1] / 20000.0, 0.25, 4 * std::sqrt(0.25 * 0.75 / 20000));
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}
