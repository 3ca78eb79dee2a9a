#include <gtest/gtest.h>

#include <random>

#include "deltacss/catalog.hpp"
#include "deltacss/sampling.hpp"
#include "deltacss/symmetry.hpp"
#include "oracles.hpp"

using namespace deltacss;

namespace {
const ParameterSet kPrm{3.0, 5.0, 0.5};
}

TEST(Group, LawIdentityAndInverses) {
  const auto els = all_elements();
  for (const auto& g : els) {
    EXPECT_EQ(g * GroupElement::identity(), g);
    EXPECT_TRUE((g * g.inverse()).is_identity());
    EXPECT_EQ(els[static_cast<std::size_t>(g.index())], g);
    for (const auto& h : els) {
      EXPECT_EQ(representation(g * h), representation(g) * representation(h)) << g.name() << h.name();
    }
  }
  const auto r = GroupElement::r();
  const auto s = GroupElement::s();
  EXPECT_TRUE((r * r * r).is_identity());
  EXPECT_TRUE((s * s).is_identity());
  EXPECT_EQ(r * s, s * r);
  EXPECT_EQ((r * r * s).name(), "r2s");
}

TEST(Group, RepresentationIsSignedPermutation) {
  for (const auto& g : all_elements()) {
    const Rep15 p = representation(g);
    EXPECT_EQ(p * p.transpose(), Rep15::Identity());
    EXPECT_EQ(p.cwiseAbs().rowwise().sum(), (Eigen::Matrix<int, 15, 1>::Ones()));
  }
  const Rep15 s = representation(GroupElement::s());
  for (int k = 0; k < 15; ++k) {
    const bool negated = k == 2 || k == 5 || k == 8 || k == 10 || k == 12 || k == 14;
    EXPECT_EQ(s(k, k), negated ? -1 : 1);
  }
}

TEST(Group, ActionPreservesTheVariety) {
  std::mt19937_64 rng(21);
  const auto m = build_delta(kPrm);
  for (int k = 0; k < 20; ++k) {
    const Vector x = random_on_variety(kPrm, rng);
    for (const auto& g : all_elements()) {
      EXPECT_LT(max_residual(m, act(g, x)), 1e-11);
    }
  }
}

TEST(Group, MixingMatricesFitExactly) {
  std::mt19937_64 rng(22);
  const auto m = build_delta(kPrm);
  for (const auto& g : all_elements()) {
    const MixingFit fit = constraint_mixing_matrix(m, g, rng);
    EXPECT_LE(fit.residual, 1e-10) << g.name();
    EXPECT_EQ(numerical_rank(fit.matrix), 12);
  }
  const MixingFit fs = constraint_mixing_matrix(m, GroupElement::s(), rng);
  for (int k = 0; k < 12; ++k) {
    const double expect = (k == 8 || k == 11) ? -1.0 : 1.0;
    EXPECT_NEAR(fs.matrix(k, k), expect, 1e-10) << k;
  }
  EXPECT_LT((fs.matrix.cwiseAbs() - Matrix::Identity(12, 12)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Group, NonInvariantSystemIsRejected) {
  auto m = build_delta(kPrm);
  m.constraints.evaluate = [](const Vector& x) {
    Vector f = Vector::Zero(12);
    f(0) = x(0) + 2.0 * x(1) * x(1);
    for (int k = 1; k < 12; ++k) f(k) = x(k);
    return f;
  };
  std::mt19937_64 rng(23);
  EXPECT_THROW(constraint_mixing_matrix(m, GroupElement::r(), rng), InvarianceError);
}

TEST(Orbit, RepresentativesHaveFreeOrbitsOfSix) {
  for (const auto& row : oracle::kTable_3_5_05) {
    const auto o = orbit({oracle::to_vec(row)});
    EXPECT_EQ(o.size(), 6u);
    const auto rep = is_free_on(o, 1e-6);
    EXPECT_TRUE(rep.free);
    EXPECT_GT(rep.min_displacement, 1e-6);
  }
}

TEST(Orbit, FixedPointIsReported) {
  Vector x = Vector::Zero(15);
  const auto rep = is_free_on({x}, 1e-6);
  EXPECT_FALSE(rep.free);
  EXPECT_EQ(rep.offending.size(), 5u);
}

TEST(Orbit, SortedAndDeduplicated) {
  const Vector q1 = oracle::to_vec(oracle::kTable_3_5_05[0]);
  const auto o = orbit({q1, act(GroupElement::r(), q1)});
  ASSERT_EQ(o.size(), 6u);
  for (std::size_t k = 1; k < o.size(); ++k) {
    EXPECT_TRUE(std::lexicographical_compare(o[k - 1].data(), o[k - 1].data() + 15, o[k].data(),
                                             o[k].data() + 15));
  }
}
