#include <gtest/gtest.h>

#include <set>

#include "test_support.hpp"
#include "wgs/errors.hpp"
#include "wgs/hamiltonian.hpp"

using namespace wgs;
using namespace wgs::testing;

namespace {

// Independent count of distinct nearest-neighbour pairs from coordinates.
std::set<Bond> enumerate_bonds(const Lattice& lat) {
    std::set<Bond> out;
    for (int a = 0; a < lat.size(); ++a)
        for (int b = a + 1; b < lat.size(); ++b) {
            int steps = 0, unit = 0;
            for (int ax = 0; ax < lat.dim(); ++ax) {
                int diff = std::abs(lat.coords(a)[ax] - lat.coords(b)[ax]);
                if (lat.periodic()) diff = std::min(diff, lat.extents()[ax] - diff);
                steps += diff;
                unit += diff == 1;
            }
            if (steps == 1 && unit == 1) out.insert({a, b});
        }
    return out;
}

std::set<Bond> normalized(const std::vector<Bond>& bonds) {
    std::set<Bond> out;
    for (auto [a, b] : bonds) out.insert({std::min(a, b), std::max(a, b)});
    return out;
}

}  // namespace

TEST(Lattice, BondCounts) {
    EXPECT_EQ(build_lattice(1, {4}, true)->bonds().size(), 4u);
    EXPECT_EQ(build_lattice(2, {3, 3}, true)->bonds().size(), 18u);
    EXPECT_EQ(build_lattice(3, {2, 2, 2}, true)->bonds().size(), 12u);
    EXPECT_EQ(build_lattice(1, {5}, false)->bonds().size(), 4u);
    EXPECT_EQ(build_lattice(1, {1}, false)->bonds().size(), 0u);
}

TEST(Lattice, BondsMatchExhaustiveEnumeration) {
    const std::vector<std::pair<int, std::vector<int>>> shapes = {
        {1, {2}}, {1, {7}}, {2, {2, 3}}, {2, {4, 4}}, {3, {2, 2, 2}}, {3, {3, 2, 4}}};
    for (bool periodic : {false, true})
        for (const auto& [dim, ext] : shapes) {
            const auto lat = build_lattice(dim, ext, periodic);
            const auto bonds = normalized(lat->bonds());
            EXPECT_EQ(bonds.size(), lat->bonds().size()) << "duplicate bond";
            EXPECT_EQ(bonds, enumerate_bonds(*lat));
            std::vector<int> degree(lat->size(), 0);
            for (auto [a, b] : lat->bonds()) ++degree[a], ++degree[b];
            for (int d : degree) EXPECT_LE(d, 2 * dim);
        }
}

TEST(Lattice, RowMajorCoordinates) {
    const auto lat = build_lattice(2, {3, 4}, false);
    EXPECT_EQ(lat->size(), 12);
    EXPECT_EQ(lat->coords(5)[0], 1);
    EXPECT_EQ(lat->coords(5)[1], 1);
    const int c[2] = {2, 3};
    EXPECT_EQ(lat->site_at(c), 11);
}

TEST(Lattice, RejectsBadDimensions) {
    EXPECT_THROW(build_lattice(0, {}, true), ArgumentError);
    EXPECT_THROW(build_lattice(4, {2, 2, 2, 2}, true), ArgumentError);
    EXPECT_THROW(build_lattice(2, {3}, true), ArgumentError);
    EXPECT_THROW(build_lattice(1, {1}, true), ArgumentError);
}

TEST(Lattice, BondsAreTranslationSymmetric) {
    for (const auto& [dim, ext] : std::vector<std::pair<int, std::vector<int>>>{{1, {6}}, {2, {3, 4}}, {3, {2, 3, 2}}}) {
        const auto lat = build_lattice(dim, ext, true);
        const auto bonds = normalized(lat->bonds());
        for (int ax = 0; ax < dim; ++ax) {
            std::array<int, 3> shift{0, 0, 0};
            shift[ax] = 1;
            std::set<Bond> moved;
            for (auto [a, b] : bonds) {
                const int x = lat->translate(a, shift), y = lat->translate(b, shift);
                moved.insert({std::min(x, y), std::max(x, y)});
            }
            EXPECT_EQ(moved, bonds);
        }
    }
}

TEST(Lattice, DistanceIsSymmetricAndMetric) {
    std::mt19937_64 rng(9);
    for (bool periodic : {false, true}) {
        const auto lat = build_lattice(3, {4, 3, 5}, periodic);
        std::uniform_int_distribution<int> site(0, lat->size() - 1);
        for (int t = 0; t < 500; ++t) {
            const int a = site(rng), b = site(rng), c = site(rng);
            EXPECT_EQ(lat->distance(a, b), lat->distance(b, a));
            EXPECT_LE(lat->distance(a, c), lat->distance(a, b) + lat->distance(b, c) + 1e-12);
        }
    }
    const auto ring = build_lattice(1, {10}, true);
    EXPECT_DOUBLE_EQ(ring->distance(0, 9), 1.0);
    EXPECT_DOUBLE_EQ(ring->distance(0, 5), 5.0);
}

TEST(Ising, TermsAndClassicalLimit) {
    const auto lat = build_lattice(2, {3, 3}, true);
    const auto h = ising(lat, 0.0);
    EXPECT_EQ(h.terms.pair_terms.size(), 18u);
    EXPECT_EQ(h.terms.site_terms.size(), 9u);
    // All-zero basis state: every bond aligned.
    CVector zero = CVector::Zero(1 << 9);
    zero[0] = 1.0;
    EXPECT_NEAR(oracle_expectation(zero, h.terms, 9), -18.0, 1e-12);
    EXPECT_THROW(ising(lat, std::nan("")), ArgumentError);
}

TEST(Ising, SingleBondGroundEnergy) {
    const auto h = ising(build_lattice(1, {2}, false), 1.0);
    EXPECT_NEAR(oracle_ground_energy(h.terms, 2), -std::sqrt(5.0), 1e-12);
}

TEST(Ising, ParamagneticLimit) {
    const auto lat = build_lattice(1, {6}, true);
    for (double field : {20.0, 40.0}) {
        const double e0 = oracle_ground_energy(ising(lat, field).terms, 6);
        EXPECT_NEAR(e0, -field * 6.0, 6.0 / field);
    }
}

TEST(Ising, TranslationClasses) {
    const auto h = ising(build_lattice(2, {3, 4}, true), 1.0);
    const auto classes = translation_classes(h);
    EXPECT_EQ(class_count(classes), 2);
    EXPECT_EQ(classes.pair_class.size(), h.terms.pair_terms.size());
    EXPECT_THROW(translation_classes(ising(build_lattice(1, {4}, false), 1.0)), ArgumentError);
}
