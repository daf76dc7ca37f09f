#include <gtest/gtest.h>

#include <numeric>

#include "test_support.hpp"
#include "wgs/analysis.hpp"
#include "wgs/errors.hpp"
#include "wgs/hamiltonian.hpp"

using namespace wgs;
using namespace wgs::testing;

namespace {

SuperpositionAnsatz cluster_pair() {
    RMatrix g = RMatrix::Zero(2, 2);
    g(0, 1) = g(1, 0) = kPi;
    return SuperpositionAnsatz::plus_state(2).with_graph(WeightedGraph::from_matrix(g));
}

// All nine connected correlators from a dense state vector.
Eigen::Matrix3d oracle_correlations(const CVector& psi, int n, int a, int b) {
    const Mat2 paulis[3] = {pauli::x(), pauli::y(), pauli::z()};
    auto single = [&](int site, const Mat2& p) {
        TwoLocalObservable obs;
        obs.site_terms.push_back({site, p});
        return oracle_expectation(psi, obs, n);
    };
    Eigen::Matrix3d q;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            TwoLocalObservable obs;
            obs.pair_terms.push_back({a, b, kron(paulis[i], paulis[j])});
            q(i, j) = oracle_expectation(psi, obs, n) - single(a, paulis[i]) * single(b, paulis[j]);
        }
    return q;
}

SuperpositionAnsatz power_law_graph(int n, double beta) {
    const auto ring = build_lattice(1, {n}, true);
    RMatrix g = RMatrix::Zero(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) g(a, b) = g(b, a) = std::pow(ring->distance(a, b), -beta);
    return SuperpositionAnsatz::plus_state(n).with_graph(WeightedGraph::from_matrix(g));
}

}  // namespace

TEST(Correlations, ProductStateHasNone) {
    const auto rec = correlations(SuperpositionAnsatz::plus_state(5), 1, 3);
    EXPECT_LT(rec.q.cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT(rec.q_max, 1e-12);
}

TEST(Correlations, ClusterPairIsPerfectlyCorrelated) {
    const auto rec = correlations(cluster_pair(), 0, 1);
    EXPECT_LT((rec.q - oracle_correlations(oracle_state(cluster_pair()), 2, 0, 1)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(rec.q_max, 1.0, 1e-12);
}

TEST(Correlations, MatchOracleAndStayBounded) {
    std::mt19937_64 rng(61);
    for (int t = 0; t < 10; ++t) {
        const auto ans = random_ansatz(rng, 6, 1 + t % 3);
        const int a = t % 6, b = (t + 1 + t % 4) % 6;
        const auto rec = correlations(ans, a, b);
        EXPECT_LT((rec.q - oracle_correlations(oracle_state(ans), 6, a, b)).cwiseAbs().maxCoeff(), 1e-10);
        EXPECT_LE(rec.q.cwiseAbs().maxCoeff(), 1.0 + 1e-9);
        EXPECT_DOUBLE_EQ(rec.q_max, rec.q.cwiseAbs().maxCoeff());
    }
    EXPECT_THROW(correlations(SuperpositionAnsatz::plus_state(3), 1, 1), ArgumentError);
}

TEST(Correlations, InvariantUnderGlobalPhaseAndDecoupledAncillas) {
    std::mt19937_64 rng(62);
    const auto ans = random_ansatz(rng, 5, 2);
    const auto base = correlations(ans, 1, 3).q;
    const auto phased = correlations(ans.with_weights(cplx(std::cos(0.7), std::sin(0.7)) * ans.weights()), 1, 3).q;
    EXPECT_LT((base - phased).cwiseAbs().maxCoeff(), 1e-12);

    // Two extra sites with no phase couplings and branch-independent deformations.
    const int n = 7;
    RMatrix g = RMatrix::Zero(n, n);
    g.topLeftCorner(5, 5) = ans.graph().to_matrix();
    CMatrix d(n, 2);
    d.topRows(5) = ans.deformations().values();
    d.row(5).setConstant(cplx(0.4, -1.1));
    d.row(6).setConstant(cplx(-0.2, 0.5));
    std::vector<Mat2> us = ans.unitaries().matrices();
    us.push_back(haar_unitary(rng));
    us.push_back(haar_unitary(rng));
    const SuperpositionAnsatz extended(WeightedGraph::from_matrix(g), DeformationMatrix(d), LocalUnitaries(us),
                                       ans.weights());
    EXPECT_LT((base - correlations(extended, 1, 3).q).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(BlockEntropy, Examples) {
    const int three[3] = {0, 2, 4};
    EXPECT_NEAR(block_entropy(SuperpositionAnsatz::plus_state(6), three), 0.0, 1e-10);
    const int half[1] = {0};
    EXPECT_NEAR(block_entropy(cluster_pair(), half), 1.0, 1e-12);
}

TEST(BlockEntropy, PowerLawPhasesGrowWithBlock) {
    const auto ans = power_law_graph(12, 0.5);
    double prev = -1.0;
    for (int l = 1; l <= 4; ++l) {
        std::vector<int> block(l);
        std::iota(block.begin(), block.end(), 0);
        const double s = block_entropy(ans, block);
        EXPECT_GT(s, prev) << "L=" << l;
        prev = s;
    }
}

TEST(BlockEntropy, ComplementSymmetryAndBounds) {
    std::mt19937_64 rng(63);
    for (int t = 0; t < 5; ++t) {
        const int n = 8 + t % 3;
        const auto ans = random_ansatz(rng, n, 1 + t % 3);
        std::vector<int> all(n);
        std::iota(all.begin(), all.end(), 0);
        std::shuffle(all.begin(), all.end(), rng);
        const int k = 1 + t % 4;
        const std::vector<int> block(all.begin(), all.begin() + k);
        const std::vector<int> rest(all.begin() + k, all.end());
        const double s = block_entropy(ans, block);
        EXPECT_NEAR(s, block_entropy(ans, rest), 1e-8);
        EXPECT_GE(s, -1e-12);
        EXPECT_LE(s, k + 1e-12);
        const CMatrix rho = oracle_partial_trace(oracle_state(ans), block, n);
        EXPECT_NEAR(s, von_neumann_bits(rho), 1e-9);
    }
}

TEST(VonNeumann, RejectsClearlyNegativeSpectra) {
    CMatrix rho = CMatrix::Zero(2, 2);
    rho(0, 0) = 1.1;
    rho(1, 1) = -0.1;
    EXPECT_THROW(von_neumann_bits(rho), NumericRangeError);
    rho(0, 0) = 1.0;
    rho(1, 1) = -1e-12;
    EXPECT_NEAR(von_neumann_bits(rho), 0.0, 1e-10);
}

TEST(CubeBlock, AxisAlignedCorner) {
    const auto lat = build_lattice(2, {4, 4}, true);
    EXPECT_EQ(cube_block(*lat, 2), (std::vector<int>{0, 1, 4, 5}));
    EXPECT_EQ(cube_block(*build_lattice(3, {3, 3, 3}, true), 2).size(), 8u);
    EXPECT_THROW(cube_block(*lat, 5), ArgumentError);
}

TEST(AreaLawFit, SyntheticAndProductData) {
    for (int dim = 1; dim <= 3; ++dim) {
        std::vector<std::pair<int, double>> pts;
        for (int l = 1; l <= 4; ++l) pts.push_back({l, 2.0 * std::pow(l, dim - 1)});
        const auto fit = area_law_fit(pts, dim);
        EXPECT_NEAR(fit.coefficient, 2.0, 1e-12);
        EXPECT_NEAR(fit.residual, 0.0, 1e-20);
    }
    const std::vector<std::pair<int, double>> flat = {{1, 0.0}, {2, 0.0}, {3, 0.0}};
    EXPECT_EQ(area_law_fit(flat, 2).coefficient, 0.0);
}

TEST(AreaLawFit, Errors) {
    const std::vector<std::pair<int, double>> two = {{1, 0.5}, {2, 0.6}};
    EXPECT_THROW(area_law_fit(two, 1), ArgumentError);
    const std::vector<std::pair<int, double>> zero = {{0, 0.5}, {1, 0.6}, {2, 0.7}};
    EXPECT_THROW(area_law_fit(zero, 2), ArgumentError);
}
