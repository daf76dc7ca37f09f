#include "wgs/hamiltonian.hpp"

#include <cmath>
#include <map>
#include <set>

#include "wgs/errors.hpp"

namespace wgs {

std::shared_ptr<const Lattice> build_lattice(int dim, std::vector<int> extents, bool periodic) {
    return std::make_shared<const Lattice>(Lattice::build(dim, std::move(extents), periodic));
}

TwoLocalHamiltonian ising(std::shared_ptr<const Lattice> lattice, double field) {
    if (!lattice) throw ArgumentError("ising model needs a lattice");
    if (!std::isfinite(field)) throw ArgumentError("field must be finite");
    TwoLocalHamiltonian h;
    const Mat4 zz = -kron(pauli::z(), pauli::z());
    for (const auto& [a, b] : lattice->bonds()) h.terms.pair_terms.push_back({a, b, zz});
    const Mat2 x = -field * pauli::x();
    for (int a = 0; a < lattice->size(); ++a) h.terms.site_terms.push_back({a, x});
    h.lattice = std::move(lattice);
    h.model = "ising";
    return h;
}

TermClasses translation_classes(const TwoLocalHamiltonian& h) {
    if (!h.lattice || !h.lattice->periodic())
        throw ArgumentError("translation classes need a periodic lattice");
    const Lattice& lat = *h.lattice;
    const int dim = lat.dim();
    auto negate = [&](std::array<int, 3> d) {
        for (int ax = 0; ax < dim; ++ax) d[ax] = (lat.extents()[ax] - d[ax]) % lat.extents()[ax];
        return d;
    };

    // Pre-unitary blocks of a translation-invariant state depend only on the
    // displacement between the two sites.
    std::map<std::array<int, 3>, int> ids;
    TermClasses out;
    for (const auto& t : h.terms.pair_terms) {
        const auto fwd = lat.displacement(t.a, t.b);
        const auto bwd = negate(fwd);
        const bool swapped = bwd < fwd;
        auto [it, inserted] = ids.emplace(swapped ? bwd : fwd, static_cast<int>(ids.size()));
        out.pair_class.push_back(it->second);
        out.swapped.push_back(swapped ? 1 : 0);
    }
    return out;
}

int class_count(const TermClasses& classes) {
    std::set<int> s(classes.pair_class.begin(), classes.pair_class.end());
    return static_cast<int>(s.size());
}

}  // namespace wgs
