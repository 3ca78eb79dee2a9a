#include <gtest/gtest.h>

#include <random>

#include "deltacss/catalog.hpp"
#include "deltacss/classification.hpp"
#include "deltacss/sampling.hpp"
#include "deltacss/witness.hpp"

using namespace deltacss;

namespace {
const ParameterSet kMain{3.0, 5.0, 0.5};
}

TEST(Classify, RandomDeltaPointsAreRegular) {
  const auto m = build_delta(kMain);
  std::mt19937_64 rng(17);
  for (int k = 0; k < 20; ++k) {
    const auto c = classify(m, random_on_variety(kMain, rng));
    EXPECT_FALSE(c.css);
    EXPECT_EQ(c.jacobian_rank, 12);
    EXPECT_EQ(c.tangent_dim, 3);
    EXPECT_EQ(c.forward_rank, 3);
    EXPECT_EQ(c.actuator_rank, 3);
    EXPECT_TRUE(c.regular);
    EXPECT_EQ(c.subset_ranks.size(), 8u);
  }
}

TEST(Classify, CatalogPointEvidence) {
  const auto m = build_delta(kMain);
  const Vector q1 = closed_form_point(CatalogLabel::Q1, kMain);
  const auto bare = classify(m, q1);
  EXPECT_TRUE(bare.css);
  EXPECT_EQ(bare.css_evidence, CssEvidence::RankDropOnly);
  EXPECT_EQ(bare.jacobian_rank, 11);
  const auto cert = certify(m, q1);
  EXPECT_EQ(classify(m, q1, {}, &cert).css_evidence, CssEvidence::Certified);
  const Vector q2 = closed_form_point(CatalogLabel::Q2, kMain);
  EXPECT_EQ(classify(m, q2, {}, &cert).css_evidence, CssEvidence::RankDropOnly);
}

TEST(Classify, CrankSliderDeadPointIsActuatorSingular) {
  const auto m = build_crank_slider(1.0, 2.0);
  const auto dead = classify(m, Vector(Vec3(1, 0, 3)));
  EXPECT_FALSE(dead.css);
  EXPECT_EQ(dead.tangent_dim, 1);
  EXPECT_TRUE(dead.as);
  EXPECT_EQ(dead.actuator_rank, 0);
  EXPECT_FALSE(dead.regular);
  const double y = std::sqrt(0.75);
  const auto generic = classify(m, Vector(Vec3(0.5, y, 0.5 + std::sqrt(4.0 - 0.75))));
  EXPECT_TRUE(generic.regular);
}

TEST(Classify, ChartsAgree) {
  const auto m = build_delta(kMain);
  std::mt19937_64 rng(23);
  for (int k = 0; k < 10; ++k) {
    const Vector x = random_on_variety(kMain, rng);
    ActuatorChart stereo;
    stereo.kind = ActuatorChart::Kind::Stereographic;
    // Keep the pole away from every arm angle.
    double best = 0.0, best_gap = -1.0;
    for (int n = 0; n < 12; ++n) {
      const double rot = n * M_PI / 6;
      double gap = 1e9;
      for (int i = 0; i < 3; ++i) {
        gap = std::min(gap, std::abs(normalize_angle(std::atan2(x(10 + 2 * i), x(9 + 2 * i)) - rot - M_PI)));
      }
      if (gap > best_gap) best_gap = gap, best = n * M_PI / 6;
    }
    stereo.rotation = best;
    const auto angle = classify(m, x);
    const auto st = classify(m, x, {}, nullptr, stereo);
    EXPECT_EQ(angle.actuator_rank, st.actuator_rank);
    EXPECT_EQ(angle.as, st.as);
    for (std::size_t s = 0; s < angle.subset_ranks.size(); ++s) {
      EXPECT_EQ(angle.subset_ranks[s].rank, st.subset_ranks[s].rank);
    }
  }
}

TEST(Classify, FlagsAreGroupInvariant) {
  const auto m = build_delta(kMain);
  std::mt19937_64 rng(29);
  for (int k = 0; k < 5; ++k) {
    const Vector x = random_on_variety(kMain, rng);
    const auto base = classify(m, x);
    for (const auto& g : all_elements()) {
      const auto c = classify(m, act(g, x));
      EXPECT_EQ(c.css, base.css);
      EXPECT_EQ(c.ees, base.ees);
      EXPECT_EQ(c.as, base.as);
      EXPECT_EQ(c.jacobian_rank, base.jacobian_rank);
    }
  }
}

TEST(Classify, ActuatorRankEdgeCases) {
  const auto m = build_delta(kMain);
  const Vector q4 = closed_form_point(CatalogLabel::Q4, kMain);
  const Matrix t = Matrix::Identity(15, 2);
  EXPECT_EQ(actuator_chart_rank(m, q4, t, {}), 0);
  // The third witness path at q4 moves the platform with all arms locked.
  const auto cert = certify(m, q4);
  const Matrix g3 = cert.tangents[2].normalized();
  EXPECT_EQ(actuator_chart_rank(m, q4, g3, {0, 1, 2}), 0);
  EXPECT_EQ(actuator_chart_rank(m, q4, cert.tangents[0].normalized(), {0, 1, 2}), 1);
  EXPECT_THROW(actuator_chart_rank(m, q4, t, {3}), InputError);
}

TEST(Classify, RejectsBadInput) {
  const auto m = build_delta(kMain);
  Vector x = closed_form_point(CatalogLabel::Q1, kMain);
  x(0) += 1e-3;
  EXPECT_THROW(classify(m, x), NotOnVarietyError);
  EXPECT_THROW(classify(m, Vector::Zero(4)), InputError);
}
