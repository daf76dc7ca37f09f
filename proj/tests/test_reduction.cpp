#include <gtest/gtest.h>

#include <numeric>

#include "test_support.hpp"
#include "wgs/errors.hpp"
#include "wgs/hamiltonian.hpp"
#include "wgs/optimize.hpp"
#include "wgs/reduction.hpp"

using namespace wgs;
using namespace wgs::testing;

namespace {

SuperpositionAnsatz cluster_chain(int n) {
    RMatrix g = RMatrix::Zero(n, n);
    for (int a = 0; a + 1 < n; ++a) g(a, a + 1) = g(a + 1, a) = kPi;
    return SuperpositionAnsatz(WeightedGraph::from_matrix(g), DeformationMatrix(CMatrix::Zero(n, 1)),
                               LocalUnitaries::identity(n), CVector::Ones(1));
}

std::vector<int> random_sites(std::mt19937_64& rng, int n, int k) {
    std::vector<int> all(n);
    std::iota(all.begin(), all.end(), 0);
    std::shuffle(all.begin(), all.end(), rng);
    all.resize(k);
    return all;
}

double min_eigenvalue(const CMatrix& m) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
    return es.eigenvalues()[0];
}

}  // namespace

TEST(GramBlock, ClusterMiddleSiteIsMaximallyMixed) {
    const int mid[1] = {1};
    const CMatrix g = gram_block(cluster_chain(3), mid).value();
    EXPECT_NEAR(std::abs(g(0, 0) - 4.0), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(g(1, 1) - 4.0), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(g(0, 1)), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(g(1, 0)), 0.0, 1e-12);
}

TEST(GramBlock, ProductStateSite) {
    const int n = 7;
    for (int a = 0; a < n; ++a) {
        const int site[1] = {a};
        const CMatrix g = gram_block(SuperpositionAnsatz::plus_state(n), site).value();
        EXPECT_LT(max_abs(g - std::pow(2.0, n - 1) * CMatrix::Ones(2, 2)), 1e-10);
    }
}

TEST(GramBlock, MatchesUnnormalizedPartialTrace) {
    std::mt19937_64 rng(101);
    for (int trial = 0; trial < 20; ++trial) {
        const auto ans = random_ansatz(rng, 8, 3);
        const auto sites = random_sites(rng, 8, 2);
        const CMatrix expect = oracle_partial_trace(oracle_amplitudes(ans), sites, 8);
        const CMatrix got = gram_block(ans, sites).value();
        EXPECT_LT(max_abs(got - expect), 1e-10 * std::max(1.0, max_abs(expect)));
    }
}

TEST(GramBlock, TraceEqualsNormForEveryBlockSize) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        const auto ans = random_ansatz(rng, 7, 2);
        const double norm = norm_squared(ans);
        for (int k = 0; k <= 4; ++k) {
            const auto sites = random_sites(rng, 7, k);
            EXPECT_NEAR(gram_block(ans, sites).value().trace().real(), norm, 1e-10 * norm);
        }
    }
}

TEST(GramBlock, ErrorsOnCapAndBadSites) {
    const auto ans = SuperpositionAnsatz::plus_state(14);
    std::vector<int> thirteen(13);
    std::iota(thirteen.begin(), thirteen.end(), 0);
    EXPECT_THROW(gram_block(ans, thirteen), CapacityError);
    const int dup[2] = {3, 3};
    EXPECT_THROW(gram_block(ans, dup), ArgumentError);
    const int out[1] = {14};
    EXPECT_THROW(gram_block(ans, out), ArgumentError);
}

TEST(NormSquared, Examples) {
    std::mt19937_64 rng(1);
    auto ans = random_ansatz(rng, 6, 1);
    ans = ans.with_deformations(DeformationMatrix(CMatrix::Zero(6, 1))).with_weights(CVector::Ones(1));
    EXPECT_NEAR(norm_squared(ans), 64.0, 1e-10);

    CMatrix d = CMatrix::Zero(2, 1);
    d(0, 0) = std::log(2.0);
    const SuperpositionAnsatz two(WeightedGraph(2), DeformationMatrix(d), LocalUnitaries::identity(2),
                                  CVector::Ones(1));
    EXPECT_NEAR(norm_squared(two), 10.0, 1e-12);
}

TEST(NormSquared, MatchesDenseAmplitudes) {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        const auto ans = random_ansatz(rng, 6, 2);
        const double expect = oracle_amplitudes(ans).squaredNorm();
        EXPECT_NEAR(norm_squared(ans), expect, 1e-10 * expect);
    }
}

TEST(NormSquared, IndependentOfLocalUnitaries) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        const auto ans = random_ansatz(rng, 6, 3);
        std::vector<Mat2> us(6);
        for (auto& u : us) u = haar_unitary(rng);
        const double a = norm_squared(ans);
        const double b = norm_squared(ans.with_unitaries(LocalUnitaries(us)));
        EXPECT_NEAR(a, b, 1e-12 * a);
    }
}

TEST(NormSquared, OverflowIsReported) {
    const int n = 12;
    CMatrix d = CMatrix::Constant(n, 1, cplx(40.0, 0.0));
    const SuperpositionAnsatz big(WeightedGraph(n), DeformationMatrix(d), LocalUnitaries::identity(n),
                                  CVector::Ones(1));
    EXPECT_THROW(norm_squared(big), NumericRangeError);
    EXPECT_TRUE(std::isfinite(log_norm_squared(big)));
    // Normalized quantities stay representable.
    const int site[1] = {0};
    const CMatrix rho = reduced_density(big, site).matrix;
    EXPECT_NEAR(rho.trace().real(), 1.0, 1e-12);
}

TEST(ReducedDensity, Examples) {
    const int mid[1] = {1};
    EXPECT_LT(max_abs(reduced_density(cluster_chain(3), mid).matrix - 0.5 * CMatrix::Identity(2, 2)), 1e-12);
    const int first[1] = {0};
    EXPECT_LT(max_abs(reduced_density(SuperpositionAnsatz::plus_state(5), first).matrix -
                      0.5 * CMatrix::Ones(2, 2)),
              1e-12);
}

TEST(ReducedDensity, MatchesOracleAndIsAState) {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 20; ++trial) {
        const auto ans = random_ansatz(rng, 8, 1 + trial % 3);
        const auto sites = random_sites(rng, 8, 1 + trial % 3);
        const CMatrix rho = reduced_density(ans, sites).matrix;
        EXPECT_LT(max_abs(rho - oracle_partial_trace(oracle_state(ans), sites, 8)), 1e-10);
        EXPECT_NEAR(rho.trace().real(), 1.0, 1e-12);
        EXPECT_LT(hermiticity_defect(rho), 1e-10);
        EXPECT_GT(min_eigenvalue(rho), -1e-10);
    }
}

TEST(ReducedDensity, PartialTraceConsistency) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 3 + trial % 8;
        const auto ans = random_ansatz(rng, n, 2);
        const auto sites = random_sites(rng, n, 2);
        const Mat4 pair = reduced_density(ans, sites).matrix;
        const int a[1] = {sites[0]};
        const int b[1] = {sites[1]};
        EXPECT_LT(max_abs(partial_trace_pair(pair, 0) - reduced_density(ans, a).matrix), 1e-10);
        EXPECT_LT(max_abs(partial_trace_pair(pair, 1) - reduced_density(ans, b).matrix), 1e-10);
    }
}

TEST(Expectation, PlusStateIsingEnergy) {
    auto lat = build_lattice(1, {6}, true);
    for (double field : {0.0, 0.7, 2.0}) {
        const auto h = ising(lat, field);
        EXPECT_NEAR(expectation(SuperpositionAnsatz::plus_state(6), h.terms), -field * 6.0, 1e-12);
    }
}

TEST(Expectation, OpenChainClusterStateHasZeroIsingEnergy) {
    const auto h = ising(build_lattice(1, {3}, false), 0.0);
    const auto ans = cluster_chain(3);
    const double expect = oracle_expectation(oracle_state(ans), h.terms, 3);
    EXPECT_NEAR(expect, 0.0, 1e-12);
    EXPECT_NEAR(expectation(ans, h.terms), expect, 1e-12);
}

TEST(Expectation, MatchesDenseForRandomObservables) {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 20; ++trial) {
        const auto ans = random_ansatz(rng, 8, 1 + trial % 3);
        const auto obs = random_observable(rng, 8, 10);
        EXPECT_NEAR(expectation(ans, obs), oracle_expectation(oracle_state(ans), obs, 8), 1e-9);
    }
}

TEST(Expectation, TranslationClassesGiveTheSameValue) {
    auto lat = build_lattice(1, {8}, true);
    SymmetryProfile sym;
    sym.mode = SymmetryMode::fully_translation_invariant;
    sym.lattice = lat;
    const auto h = ising(lat, 0.9);
    const TermClasses classes = translation_classes(h);
    const auto ans = SuperpositionAnsatz(WeightedGraph::distance_kernel(lat, {0.4, -0.2, 0.1, 0.05}),
                                         DeformationMatrix(CMatrix::Constant(8, 2, cplx(0.3, 0.2))),
                                         LocalUnitaries(std::vector<Mat2>(8, rotation_unitary({0.3, 0.1, -0.2}))),
                                         CVector{{cplx(1.0), cplx(0.2, 0.1)}}, sym);
    EvalStats with, without;
    const double a = expectation(ans, h.terms, {&classes, &with});
    const double b = expectation(ans, h.terms, {nullptr, &without});
    EXPECT_NEAR(a, b, 1e-12);
    EXPECT_LT(with.gram_blocks, without.gram_blocks);
}

TEST(Expectation, RejectsOutOfRangeTerms) {
    TwoLocalObservable obs;
    obs.site_terms.push_back({5, Mat2::Identity()});
    EXPECT_THROW(expectation(SuperpositionAnsatz::plus_state(3), obs), ArgumentError);
}
