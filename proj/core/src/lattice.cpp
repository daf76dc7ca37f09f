#include "wgs/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>

#include "wgs/errors.hpp"

namespace wgs {

Lattice Lattice::build(int dim, std::vector<int> extents, bool periodic) {
    if (dim < 1 || dim > 3)
        throw ArgumentError("lattice dimension must be 1, 2 or 3, got " + std::to_string(dim));
    if (static_cast<int>(extents.size()) != dim)
        throw ArgumentError("lattice needs one extent per axis");
    for (int e : extents) {
        if (periodic && e < 2) throw ArgumentError("periodic lattice extents must be >= 2");
        if (e < 1) throw ArgumentError("lattice extents must be positive");
    }

    Lattice lat;
    lat.dim_ = dim;
    lat.periodic_ = periodic;
    lat.extents_ = std::move(extents);
    long long n = 1;
    for (int e : lat.extents_) n *= e;
    if (n > (1LL << 30)) throw CapacityError("lattice too large");
    lat.n_sites_ = static_cast<int>(n);

    lat.coords_.resize(static_cast<std::size_t>(n) * dim);
    for (int site = 0; site < lat.n_sites_; ++site) {
        int rem = site;
        for (int ax = dim - 1; ax >= 0; --ax) {
            lat.coords_[static_cast<std::size_t>(site) * dim + ax] = rem % lat.extents_[ax];
            rem /= lat.extents_[ax];
        }
    }

    std::set<Bond> seen;
    std::vector<int> nb(dim);
    for (int site = 0; site < lat.n_sites_; ++site) {
        auto c = lat.coords(site);
        for (int ax = 0; ax < dim; ++ax) {
            std::copy(c.begin(), c.end(), nb.begin());
            nb[ax] += 1;
            if (nb[ax] == lat.extents_[ax]) {
                if (!periodic) continue;
                nb[ax] = 0;
            }
            int other = lat.site_at(nb);
            if (other == site) continue;
            Bond b{std::min(site, other), std::max(site, other)};
            if (seen.insert(b).second) lat.bonds_.push_back(b);
        }
    }

    // Displacement table: per axis 0..L/2 (periodic) or 0..L-1 (open).
    lat.disp_dims_.resize(dim);
    std::size_t table = 1;
    for (int ax = 0; ax < dim; ++ax) {
        lat.disp_dims_[ax] = periodic ? lat.extents_[ax] / 2 + 1 : lat.extents_[ax];
        table *= lat.disp_dims_[ax];
    }
    std::vector<long long> sq(table);
    std::set<long long> distinct;
    for (std::size_t idx = 0; idx < table; ++idx) {
        std::size_t rem = idx;
        long long s = 0;
        for (int ax = dim - 1; ax >= 0; --ax) {
            long long d = static_cast<long long>(rem % lat.disp_dims_[ax]);
            rem /= lat.disp_dims_[ax];
            s += d * d;
        }
        sq[idx] = s;
        if (s > 0) distinct.insert(s);
    }
    std::map<long long, int> class_of;
    for (long long s : distinct) {
        class_of[s] = static_cast<int>(lat.class_distances_.size());
        lat.class_distances_.push_back(std::sqrt(static_cast<double>(s)));
    }
    lat.disp_class_.resize(table);
    for (std::size_t idx = 0; idx < table; ++idx) lat.disp_class_[idx] = sq[idx] == 0 ? -1 : class_of[sq[idx]];
    return lat;
}

int Lattice::site_at(std::span<const int> c) const {
    int site = 0;
    for (int ax = 0; ax < dim_; ++ax) {
        if (c[ax] < 0 || c[ax] >= extents_[ax]) throw ArgumentError("coordinate outside lattice");
        site = site * extents_[ax] + c[ax];
    }
    return site;
}

std::array<int, 3> Lattice::displacement(int a, int b) const {
    std::array<int, 3> d{0, 0, 0};
    auto ca = coords(a);
    auto cb = coords(b);
    for (int ax = 0; ax < dim_; ++ax) {
        int diff = cb[ax] - ca[ax];
        if (periodic_) diff = ((diff % extents_[ax]) + extents_[ax]) % extents_[ax];
        d[ax] = diff;
    }
    return d;
}

std::array<int, 3> Lattice::abs_displacement(int a, int b) const {
    std::array<int, 3> d{0, 0, 0};
    auto ca = coords(a);
    auto cb = coords(b);
    for (int ax = 0; ax < dim_; ++ax) {
        int diff = std::abs(cb[ax] - ca[ax]);
        if (periodic_) diff = std::min(diff, extents_[ax] - diff);
        d[ax] = diff;
    }
    return d;
}

double Lattice::distance(int a, int b) const {
    auto d = abs_displacement(a, b);
    double s = 0.0;
    for (int ax = 0; ax < dim_; ++ax) s += static_cast<double>(d[ax]) * d[ax];
    return std::sqrt(s);
}

int Lattice::translate(int site, const std::array<int, 3>& offset) const {
    auto c = coords(site);
    int out = 0;
    for (int ax = 0; ax < dim_; ++ax) {
        int v = c[ax] + offset[ax];
        v = ((v % extents_[ax]) + extents_[ax]) % extents_[ax];
        out = out * extents_[ax] + v;
    }
    return out;
}

int Lattice::sublattice(int site) const {
    int s = 0;
    for (int v : coords(site)) s += v;
    return s % 2;
}

int Lattice::displacement_index(const std::array<int, 3>& abs_disp) const {
    int idx = 0;
    for (int ax = 0; ax < dim_; ++ax) idx = idx * disp_dims_[ax] + abs_disp[ax];
    return idx;
}

int Lattice::distance_class(int a, int b) const {
    return disp_class_[displacement_index(abs_displacement(a, b))];
}

}  // namespace wgs
