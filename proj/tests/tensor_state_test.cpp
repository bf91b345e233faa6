#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "pointerlab/error.hpp"
#include "pointerlab/tensor_state.hpp"

using namespace pointerlab;

namespace {

const Pair kExcited{Complex{0.0}, Complex{1.0}};
const Pair kGround{Complex{1.0}, Complex{0.0}};

ProductFactors all_excited(int n, Pair particle) {
  ProductFactors f;
  f.particle = particle;
  f.units.assign(n, kExcited);
  return f;
}

}  // namespace

TEST(BasisIndex, ParticleBitIsMostSignificant) {
  BasisIndex b{1, {0, 0, 0}};
  EXPECT_EQ(b.encode(), 8u);
  BasisIndex first_unit{0, {1, 0, 0}};
  EXPECT_EQ(first_unit.encode(), 4u);
}

TEST(BasisIndex, RoundTripsEveryIndex) {
  const int n = 4;
  for (std::size_t i = 0; i < dimension(n); ++i) {
    EXPECT_EQ(BasisIndex::decode(i, n).encode(), i);
  }
  EXPECT_THROW(BasisIndex::decode(dimension(n), n), ValidationError);
}

TEST(BasisIndex, DeexcitedCountMatchesBits) {
  EXPECT_EQ(deexcited_count(0b1111, 4), 0);
  EXPECT_EQ(deexcited_count(0b10000, 4), 4);
  EXPECT_EQ(deexcited_count(0b0101, 4), 2);
}

TEST(MakeProductState, PureBasisState) {
  const int n = 3;
  const StateVector s = make_product_state(all_excited(n, kGround));
  for (std::size_t i = 0; i < s.size(); ++i) {
    EXPECT_EQ(s[i], i == 0b0111 ? Complex{1.0} : Complex{0.0}) << i;
  }
}

TEST(MakeProductState, EqualSuperpositionSingleUnit) {
  const double r = 1.0 / std::numbers::sqrt2;
  const StateVector s = make_product_state(all_excited(1, {Complex{r}, Complex{r}}));
  ASSERT_EQ(s.size(), 4u);
  EXPECT_NEAR(std::abs(s[0b01] - r), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(s[0b11] - r), 0.0, 1e-15);
  EXPECT_EQ(s[0b00], Complex{0.0});
  EXPECT_EQ(s[0b10], Complex{0.0});
}

TEST(MakeProductState, RandomFactorsStayNormalized) {
  std::mt19937_64 rng(11);
  ProductFactors f;
  f.particle = oracle::random_pair(rng);
  for (int k = 0; k < 6; ++k) f.units.push_back(oracle::random_pair(rng));
  const StateVector s = make_product_state(f);
  double direct = 0.0;
  for (auto a : s.amplitudes()) direct += std::norm(a);
  EXPECT_NEAR(std::sqrt(direct), 1.0, 1e-12);
}

TEST(MakeProductState, AmplitudeIsProductOfSelectedComponents) {
  std::mt19937_64 rng(5);
  ProductFactors f;
  f.particle = oracle::random_pair(rng);
  for (int k = 0; k < 3; ++k) f.units.push_back(oracle::random_pair(rng));
  const StateVector s = make_product_state(f);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const BasisIndex b = BasisIndex::decode(i, 3);
    Complex expected = f.particle[b.particle_bit];
    for (int k = 0; k < 3; ++k) expected *= f.units[k][b.unit_bits[k]];
    EXPECT_NEAR(std::abs(s[i] - expected), 0.0, 1e-15);
  }
}

TEST(MakeProductState, RejectsUnnormalizedFactorByIndex) {
  ProductFactors f = all_excited(4, kGround);
  f.units[2] = {Complex{0.6}, Complex{0.6}};
  try {
    make_product_state(f);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("unit 2"), std::string::npos) << e.what();
  }
}

TEST(MakeProductState, RejectsUnitCountBeyondCap) {
  EXPECT_THROW(make_product_state(all_excited(kMaxUnits + 1, kGround)), CapacityError);
  EXPECT_THROW(make_product_state(all_excited(0, kGround)), ValidationError);
}

TEST(StateVector, FromAmplitudesChecksNorm) {
  EXPECT_THROW(StateVector::from_amplitudes(1, {1.0, 1.0, 0.0, 0.0}), ValidationError);
  EXPECT_THROW(StateVector::from_amplitudes(1, {1.0, 0.0}), DimensionError);
  EXPECT_NO_THROW(StateVector::from_amplitudes(1, {1.0, 0.0, 0.0, 0.0}));
}

TEST(InnerProduct, UnitVectorWithItself) {
  std::mt19937_64 rng(1);
  const StateVector a = oracle::random_state(5, rng);
  const Complex v = inner_product(a, a);
  EXPECT_NEAR(v.real(), 1.0, 1e-12);
  EXPECT_EQ(v.imag(), 0.0);
}

TEST(InnerProduct, OrthogonalBasisVectorsGiveExactZero) {
  EXPECT_EQ(inner_product(StateVector::basis(3, 2), StateVector::basis(3, 7)), Complex{0.0});
}

TEST(InnerProduct, MatchesExtendedPrecisionSum) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const StateVector a = oracle::random_state(4, rng);
    const StateVector b = oracle::random_state(4, rng);
    const auto ref = oracle::inner_product_ld(a, b);
    const Complex got = inner_product(a, b);
    EXPECT_NEAR(got.real(), static_cast<double>(ref.real()), 1e-15);
    EXPECT_NEAR(got.imag(), static_cast<double>(ref.imag()), 1e-15);
  }
}

TEST(InnerProduct, ConjugateLinearInFirstArgument) {
  std::mt19937_64 rng(3);
  const auto a = oracle::random_amplitudes(dimension(3), rng);
  const StateVector b = oracle::random_state(3, rng);
  const Complex lambda{0.6, 0.8};
  std::vector<Complex> scaled = a;
  for (auto& x : scaled) x *= lambda;
  const Complex lhs = inner_product(StateVector::from_amplitudes(3, scaled), b);
  const Complex rhs = std::conj(lambda) * inner_product(StateVector::from_amplitudes(3, a), b);
  EXPECT_NEAR(std::abs(lhs - rhs), 0.0, 1e-14);
}

TEST(InnerProduct, RejectsMismatchedUnitCounts) {
  EXPECT_THROW(inner_product(StateVector::basis(2, 0), StateVector::basis(3, 0)),
               DimensionError);
}

TEST(PartialTrace, ProductStateIsRankOne) {
  const Complex c0{0.6, 0.0}, c1{0.0, 0.8};
  const auto rho = partial_trace_particle(make_product_state(all_excited(3, {c0, c1})));
  EXPECT_NEAR(std::abs(rho(0, 0) - c0 * std::conj(c0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(rho(0, 1) - c0 * std::conj(c1)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(rho(1, 1) - c1 * std::conj(c1)), 0.0, 1e-15);
  EXPECT_NEAR(rho.min_eigenvalue(), 0.0, 1e-12);
}

TEST(PartialTrace, EntangledSingleUnitStateIsDiagonal) {
  // c0 psi0 (x) |1> + c1 psi1 (x) |0>
  const double c0 = std::sqrt(0.3), c1 = std::sqrt(0.7);
  std::vector<Complex> amps(4);
  amps[0b01] = c0;
  amps[0b10] = c1;
  const auto rho = partial_trace_particle(StateVector::from_amplitudes(1, amps));
  EXPECT_NEAR(rho(0, 0).real(), 0.3, 1e-15);
  EXPECT_NEAR(rho(1, 1).real(), 0.7, 1e-15);
  EXPECT_EQ(rho(0, 1), Complex{0.0});
  EXPECT_EQ(rho(1, 0), Complex{0.0});
}

TEST(PartialTrace, MatchesDenseOracleOnRandomStates) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    const StateVector s = oracle::random_state(5, rng);
    const auto rho = partial_trace_particle(s);
    const Eigen::Matrix2cd ref = oracle::dense_partial_trace(s);
    EXPECT_LT((rho.entries() - ref).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT(rho.hermiticity_residual(), 1e-12);
    EXPECT_NEAR(rho.trace(), 1.0, 1e-10);
    EXPECT_GT(rho.min_eigenvalue(), -1e-10);
  }
}

TEST(BranchDecompose, PureUndetectableBranchHasZeroDetectableVector) {
  const StateVector s = make_product_state(all_excited(4, kGround));
  const Branches b = branch_decompose(s);
  for (auto a : b.branch1) EXPECT_EQ(a, Complex{0.0});
  EXPECT_NEAR(b.norm0(), 1.0, 1e-15);
}

TEST(BranchDecompose, ReconstructsRandomStates) {
  std::mt19937_64 rng(6);
  for (double alpha : {0.0, 0.4, 2.0}) {
    const StateVector s = oracle::random_state(6, rng);
    const Branches b = branch_decompose(s, alpha);
    const auto back = recompose(b, alpha);
    double err = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) err = std::max(err, std::abs(back[i] - s[i]));
    EXPECT_LT(err, 1e-12) << "alpha " << alpha;
    EXPECT_NEAR(b.norm0() * b.norm0() + b.norm1() * b.norm1(), 1.0, 1e-12);
  }
}

TEST(BranchDecompose, AgreesWithPartialTraceDiagonal) {
  std::mt19937_64 rng(7);
  for (double alpha : {0.0, 1.1}) {
    const StateVector s = oracle::random_state(5, rng);
    const Branches b = branch_decompose(s, alpha);
    const auto rho = partial_trace_particle(s).in_basis(alpha);
    EXPECT_NEAR(rho(0, 0).real(), b.norm0() * b.norm0(), 1e-12);
    EXPECT_NEAR(rho(1, 1).real(), b.norm1() * b.norm1(), 1e-12);
  }
}

TEST(BranchDecompose, OffDiagonalFactorizesThroughNormalizedOverlap) {
  std::mt19937_64 rng(8);
  for (int n = 1; n <= 8; ++n) {
    const StateVector s = oracle::random_state(n, rng);
    const Branches b = branch_decompose(s);
    const double d = std::abs(b.overlap()) / (b.norm0() * b.norm1());
    EXPECT_NEAR(std::abs(partial_trace_particle(s)(0, 1)), b.norm0() * b.norm1() * d, 1e-12);
  }
}

TEST(ParticleBasis, RotatedDetectableStateComponents) {
  const double alpha = 0.3;
  const auto pb = particle_basis(alpha);
  EXPECT_DOUBLE_EQ(pb.psi1[0], std::sin(alpha));
  EXPECT_DOUBLE_EQ(pb.psi1[1], std::cos(alpha));
  EXPECT_NEAR(pb.psi0[0] * pb.psi1[0] + pb.psi0[1] * pb.psi1[1], 0.0, 1e-16);
}
