#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sadic/common.hpp"
#include "sadic/dirichlet.hpp"
#include "sadic/local_arith.hpp"
#include "sadic/number_field.hpp"
#include "sadic/padic.hpp"
#include "sadic/s_adic.hpp"
#include "sadic/wedge.hpp"

namespace sadic {

namespace detail {

[[nodiscard]] inline KElem kelem_pow(const KElem& x, long e) {
    KElem base = e < 0 ? x.inverse() : x;
    KElem acc = KElem::one(x.field());
    for (long k = 0; k < std::abs(e); ++k) acc = acc * base;
    return acc;
}

/// Determinant of a per-place matrix in the promoted scalar domain.
[[nodiscard]] inline LocalValue local_det(const Place& v, const LocalMatrix& g) {
    const int dim = static_cast<int>(g.size());
    std::vector<int> all(static_cast<size_t>(dim));
    for (int i = 0; i < dim; ++i) all[static_cast<size_t>(i)] = i;
    bool all_exact = true;
    int prec = padic_default_prec;
    for (const auto& row : g)
        for (const LocalValue& a : row) {
            all_exact = all_exact && a.is_exact();
            if (a.kind() == LocalValue::Kind::padic_value)
                prec = std::min(prec, a.padic_part().prec());
        }
    if (all_exact) {
        const NumberField& F = g[0][0].exact_part().field();
        Mat<KElem> m;
        for (const auto& row : g) {
            std::vector<KElem> r;
            for (const LocalValue& a : row) r.push_back(a.exact_part());
            m.push_back(std::move(r));
        }
        return LocalValue::exact(minor_det(m, all, all, KElem::zero(F)));
    }
    switch (v.kind) {
        case PlaceKind::real: {
            Mat<double> m;
            for (const auto& row : g) {
                std::vector<double> r;
                for (const LocalValue& a : row) r.push_back(lv_real(a));
                m.push_back(std::move(r));
            }
            return LocalValue::real(minor_det(m, all, all, 0.0));
        }
        case PlaceKind::complex: {
            Mat<std::complex<double>> m;
            for (const auto& row : g) {
                std::vector<std::complex<double>> r;
                for (const LocalValue& a : row) r.push_back(lv_complex(a));
                m.push_back(std::move(r));
            }
            const std::complex<double> d = minor_det(m, all, all, std::complex<double>{0.0, 0.0});
            return LocalValue::complex_value(d.real(), d.imag());
        }
        case PlaceKind::finite: {
            Mat<PadicApprox> m;
            for (const auto& row : g) {
                std::vector<PadicApprox> r;
                for (const LocalValue& a : row) r.push_back(lv_padic(v, a, prec));
                m.push_back(std::move(r));
            }
            return LocalValue::padic(minor_det(m, all, all, PadicApprox::zero(v.p, prec)));
        }
    }
    throw InvariantError("local_det: unreachable place kind");
}

/// Matrix product in the promoted scalar domain; exact zero terms are skipped
/// so an all-exact column stays exact.
[[nodiscard]] inline LocalMatrix mat_mul_local(const Place& v, const LocalMatrix& a,
                                               const LocalMatrix& b) {
    const size_t dim = a.size();
    LocalMatrix c(dim);
    for (size_t i = 0; i < dim; ++i)
        for (size_t k = 0; k < dim; ++k) {
            LocalValue acc = LocalValue::exact(KElem::zero(a[0][0].is_exact()
                                                               ? a[0][0].exact_part().field()
                                                               : b[0][0].exact_part().field()));
            for (size_t j = 0; j < dim; ++j) {
                const LocalValue& x = a[i][j];
                const LocalValue& y = b[j][k];
                if (lv_is_exact_zero(x) || lv_is_exact_zero(y)) continue;
                acc = add_local(v, acc, mul_local(v, x, y));
            }
            c[i].push_back(std::move(acc));
        }
    return c;
}

/// |row . z|_v; when truncated p-adic cancellation hides the exact value, the
/// certified upper bound p^(-w) from the precision window is returned, so the
/// result is always an upper bound on the true magnitude.
[[nodiscard]] inline double coord_abs_upper(const Place& v, const std::vector<LocalValue>& row,
                                            const std::vector<KElem>& z) {
    try {
        return lv_abs(v, row_dot(v, row, z));
    } catch (const PrecisionError&) {
        long window = std::numeric_limits<long>::max();
        for (size_t j = 0; j < row.size(); ++j) {
            if (row[j].kind() != LocalValue::Kind::padic_value) continue;
            const PadicApprox& a = row[j].padic_part();
            if (a.is_zero() || z[j].is_zero()) continue;
            window = std::min(window, a.valuation() + valuation(z[j], v) + a.prec());
        }
        if (window == std::numeric_limits<long>::max())
            throw InvariantError("coord_abs_upper: precision loss without a truncated term");
        return to_double(rat_pow(Rat(v.p), -window));
    }
}

}  // namespace detail

// ============================================================================
// Lattice bases
// ============================================================================

/**
 * A basis of a full-rank S-lattice: per place, an invertible (m+n) x (m+n)
 * matrix of completion values; the lattice is the image of O_S^(m+n). A basis
 * built from an approximation instance keeps the instance as provenance,
 * which enables the structured point search.
 */
class SLatticeBasis {
public:
    SLatticeBasis(SConfig cfg, std::vector<LocalMatrix> g)
        : cfg_(std::move(cfg)), g_(std::move(g)) {
        if (g_.size() != cfg_.size())
            throw ValidationError("SLatticeBasis: need one matrix per place");
        if (g_[0].empty()) throw ValidationError("SLatticeBasis: empty matrix");
        dim_ = static_cast<int>(g_[0].size());
        for (size_t vi = 0; vi < g_.size(); ++vi) {
            const Place& v = cfg_.places()[vi];
            if (g_[vi].size() != static_cast<size_t>(dim_))
                throw ValidationError("SLatticeBasis: matrices must share one square shape");
            for (const auto& row : g_[vi]) {
                if (row.size() != static_cast<size_t>(dim_))
                    throw ValidationError("SLatticeBasis: matrices must be square");
                for (const LocalValue& a : row) a.validate_for(v);
            }
            const LocalValue det = detail::local_det(v, g_[vi]);
            const bool invertible = det.is_exact()
                                        ? !det.exact_part().is_zero()
                                        : (det.kind() == LocalValue::Kind::padic_value
                                               ? !det.padic_part().is_zero()
                                               : detail::lv_abs(v, det) > tau_arch);
            if (!invertible)
                throw ValidationError("SLatticeBasis: matrix at " + v.key() + " is singular");
        }
    }

    [[nodiscard]] const SConfig& config() const noexcept { return cfg_; }
    [[nodiscard]] int dim() const noexcept { return dim_; }
    [[nodiscard]] const std::vector<LocalMatrix>& matrices() const noexcept { return g_; }
    [[nodiscard]] const std::optional<DirichletInstance>& origin() const noexcept { return origin_; }

    /// det of the matrix at one place, in the promoted scalar domain.
    [[nodiscard]] LocalValue det_at(size_t vi) const {
        return detail::local_det(cfg_.places()[vi], g_.at(vi));
    }

    /// Product over places of |det|_v.
    [[nodiscard]] double content_det() const {
        double c = 1.0;
        for (size_t vi = 0; vi < cfg_.size(); ++vi)
            c *= detail::lv_abs(cfg_.places()[vi], det_at(vi));
        return c;
    }

    /// Image coordinates of an S-integer vector, per place.
    [[nodiscard]] std::vector<std::vector<LocalValue>> apply(const std::vector<KElem>& z) const {
        if (z.size() != static_cast<size_t>(dim_))
            throw ValidationError("SLatticeBasis: point dimension mismatch");
        std::vector<std::vector<LocalValue>> out;
        for (size_t vi = 0; vi < cfg_.size(); ++vi) {
            std::vector<LocalValue> coords;
            for (int i = 0; i < dim_; ++i)
                coords.push_back(detail::row_dot(cfg_.places()[vi], g_[vi][static_cast<size_t>(i)], z));
            out.push_back(std::move(coords));
        }
        return out;
    }

    /// Content of the image of z: product over places of the place norm of
    /// the image coordinates (upper bound under p-adic precision loss).
    [[nodiscard]] double point_content(const std::vector<KElem>& z) const {
        if (z.size() != static_cast<size_t>(dim_))
            throw ValidationError("SLatticeBasis: point dimension mismatch");
        double c = 1.0;
        for (size_t vi = 0; vi < cfg_.size(); ++vi) {
            const Place& v = cfg_.places()[vi];
            std::vector<double> mags;
            for (int i = 0; i < dim_; ++i)
                mags.push_back(detail::coord_abs_upper(v, g_[vi][static_cast<size_t>(i)], z));
            c *= detail::place_norm2(v, mags);
        }
        return c;
    }

private:
    friend SLatticeBasis flow_lattice(const DirichletInstance& inst);
    SConfig cfg_;
    int dim_ = 0;
    std::vector<LocalMatrix> g_;
    std::optional<DirichletInstance> origin_;
};

/**
 * The block-unipotent basis [[I_m, A_v], [0, I_n]] per place; its lattice is
 * the graph lattice of the matrix family. det = 1 at every place.
 */
[[nodiscard]] inline SLatticeBasis tau(const SConfig& cfg, int m, int n,
                                       const std::vector<LocalMatrix>& A) {
    if (m < 1 || n < 1) throw ValidationError("tau: need m >= 1 and n >= 1");
    if (A.size() != cfg.size()) throw ValidationError("tau: need one matrix per place");
    const int dim = m + n;
    const KElem zero = KElem::zero(cfg.field());
    const KElem one = KElem::one(cfg.field());
    std::vector<LocalMatrix> g;
    for (size_t vi = 0; vi < cfg.size(); ++vi) {
        if (A[vi].size() != static_cast<size_t>(m))
            throw ValidationError("tau: row count mismatch");
        LocalMatrix gm;
        for (int i = 0; i < dim; ++i) {
            std::vector<LocalValue> row;
            for (int j = 0; j < dim; ++j) {
                if (i < m && j >= m) {
                    const auto& arow = A[vi][static_cast<size_t>(i)];
                    if (arow.size() != static_cast<size_t>(n))
                        throw ValidationError("tau: column count mismatch");
                    row.push_back(arow[static_cast<size_t>(j - m)]);
                } else {
                    row.push_back(LocalValue::exact(i == j ? one : zero));
                }
            }
            gm.push_back(std::move(row));
        }
        g.push_back(std::move(gm));
    }
    return SLatticeBasis(cfg, std::move(g));
}

/**
 * Canonical completion representatives of a ray point: the component value
 * itself at a real place, its square root at a complex place (the normalized
 * absolute value there is the squared modulus), and the uniformizer power
 * with the matching value-group exponent at a finite place.
 */
[[nodiscard]] inline std::vector<std::vector<LocalValue>> canonical_flow_values(const RayPoint& t) {
    const SConfig& cfg = t.config();
    std::vector<std::vector<LocalValue>> out;
    for (size_t vi = 0; vi < cfg.size(); ++vi) {
        const Place& v = cfg.places()[vi];
        std::vector<LocalValue> row;
        for (int i = 0; i < t.m() + t.n(); ++i) {
            const Rat& comp = t.component(vi, i);
            switch (v.kind) {
                case PlaceKind::real:
                    row.push_back(LocalValue::exact(KElem(cfg.field(), comp)));
                    break;
                case PlaceKind::complex:
                    row.push_back(LocalValue::complex_value(std::sqrt(to_double(comp)), 0.0));
                    break;
                case PlaceKind::finite: {
                    const long s = *value_group_exponent(comp, v.p, v.f);
                    row.push_back(LocalValue::exact(detail::kelem_pow(v.pi, -s)));
                    break;
                }
            }
        }
        out.push_back(std::move(row));
    }
    return out;
}

/**
 * The diagonal flow basis diag(values^（-1)) per place. Every value must be a
 * nonzero completion value whose normalized absolute value matches the ray
 * component: exactly at finite places, within 1e-9 relative at archimedean
 * ones.
 */
[[nodiscard]] inline SLatticeBasis diag_flow(const RayPoint& t,
                                             const std::vector<std::vector<LocalValue>>& values) {
    const SConfig& cfg = t.config();
    const int dim = t.m() + t.n();
    if (values.size() != cfg.size()) throw ValidationError("diag_flow: need one value row per place");
    const KElem zero = KElem::zero(cfg.field());
    std::vector<LocalMatrix> g;
    for (size_t vi = 0; vi < cfg.size(); ++vi) {
        const Place& v = cfg.places()[vi];
        if (values[vi].size() != static_cast<size_t>(dim))
            throw ValidationError("diag_flow: need m+n values per place");
        LocalMatrix gm;
        for (int i = 0; i < dim; ++i) {
            const LocalValue& val = values[vi][static_cast<size_t>(i)];
            val.validate_for(v);
            const double mag = detail::lv_abs(v, val);
            if (mag == 0.0) throw ValidationError("diag_flow: zero entry");
            const double want = to_double(t.component(vi, i));
            if (v.kind == PlaceKind::finite ? mag != want
                                            : std::abs(mag - want) > 1e-9 * want)
                throw ValidationError("diag_flow: |value|_v does not match the ray component at " +
                                      v.key());
            std::vector<LocalValue> row(static_cast<size_t>(dim), LocalValue::exact(zero));
            row[static_cast<size_t>(i)] = detail::inv_local(v, val);
            gm.push_back(std::move(row));
        }
        g.push_back(std::move(gm));
    }
    return SLatticeBasis(cfg, std::move(g));
}

/**
 * The flow-translated graph lattice of an instance: diag_flow of the ray's
 * canonical representatives times the block-unipotent basis, with the
 * instance kept as provenance. The content of the determinant equals
 * field_constant^-(m+n), which is asserted to 1e-9 relative.
 */
[[nodiscard]] inline SLatticeBasis flow_lattice(const DirichletInstance& inst) {
    const SConfig& cfg = inst.config();
    const SLatticeBasis flow = diag_flow(inst.ray(), canonical_flow_values(inst.ray()));
    const SLatticeBasis graph = tau(cfg, inst.m(), inst.n(), inst.matrices());
    std::vector<LocalMatrix> g;
    for (size_t vi = 0; vi < cfg.size(); ++vi)
        g.push_back(detail::mat_mul_local(cfg.places()[vi], flow.matrices()[vi],
                                          graph.matrices()[vi]));
    SLatticeBasis L(cfg, std::move(g));
    const double want = std::pow(field_constant(cfg.field()), -(inst.m() + inst.n()));
    const double got = L.content_det();
    if (std::abs(got - want) > 1e-9 * want)
        throw InvariantError("flow_lattice: det content " + std::to_string(got) +
                             " defies the constant-power identity " + std::to_string(want));
    L.origin_ = inst;
    return L;
}

// ============================================================================
// Point searches
// ============================================================================

/// A lattice point: the S-integer preimage, its image coordinates per place,
/// and the image's content.
struct LatticePoint {
    std::vector<KElem> z;
    std::vector<std::vector<LocalValue>> image;
    double content = 0.0;
};

/**
 * Every nonzero z in the explicit search box whose image content is below
 * theta, in canonical enumeration order. Complete with respect to the box:
 * the box is part of the contract, not a heuristic.
 */
[[nodiscard]] inline std::vector<LatticePoint> lattice_points_in_content_ball(
    const SLatticeBasis& L, double theta, const SBox& box, std::uint64_t cap = default_enum_cap) {
    std::vector<LatticePoint> out;
    if (!(theta > 0.0)) return out;
    for (const auto& z : enumerate_box(box, cap)) {
        bool zero = true;
        for (const KElem& c : z) zero = zero && c.is_zero();
        if (zero) continue;
        const double content = L.point_content(z);
        if (content < theta) out.push_back(LatticePoint{z, L.apply(z), content});
    }
    return out;
}

/**
 * Structured search for a basis with instance provenance: coordinate vectors
 * q run over the doubled coordinate box (one value-group step up at finite
 * places) and each residual row is rounded by the nearest-point search over
 * the doubled residual bounds. Complete with respect to that q-box and the
 * per-row canonical rounding, which covers every witness of the tightened
 * systems.
 */
[[nodiscard]] inline std::vector<LatticePoint> lattice_points_in_content_ball(
    const SLatticeBasis& L, double theta, std::uint64_t cap = default_enum_cap) {
    if (!L.origin())
        throw ValidationError(
            "lattice_points_in_content_ball: structured search needs instance provenance; "
            "supply an explicit box instead");
    std::vector<LatticePoint> out;
    if (!(theta > 0.0)) return out;
    const DirichletInstance& inst = *L.origin();
    const SConfig& cfg = inst.config();
    const RayPoint& t = inst.ray();

    SBox qbox(cfg, inst.n());
    for (size_t vi = 0; vi < cfg.size(); ++vi) {
        const Place& v = cfg.places()[vi];
        for (int j = 0; j < inst.n(); ++j) {
            const Rat& d = t.delta(vi, j);
            if (v.kind == PlaceKind::finite)
                qbox.set_finite_exponent(vi, j, *value_group_exponent(d, v.p, v.f) + 1);
            else
                qbox.set_bound(vi, j, d * 2);
        }
    }
    for (const auto& q : enumerate_box(qbox, cap)) {
        bool zero = true;
        for (const KElem& c : q) zero = zero && c.is_zero();
        if (zero) continue;
        std::vector<KElem> z;
        bool ok = true;
        for (int i = 0; i < inst.m() && ok; ++i) {
            std::vector<LocalValue> targets;
            std::vector<Rat> bounds;
            for (size_t vi = 0; vi < cfg.size(); ++vi) {
                const Place& v = cfg.places()[vi];
                targets.push_back(
                    detail::row_dot(v, inst.matrices()[vi][static_cast<size_t>(i)], q));
                const Rat& e = t.eps(vi, i);
                bounds.push_back(v.kind == PlaceKind::finite ? Rat(e * rat_pow(Rat(v.p), v.f))
                                                             : Rat(e * 2));
            }
            const auto p = nearest_s_integer(SAdelePoint(cfg, targets), bounds, cap);
            if (!p) ok = false;
            else z.push_back(*p);
        }
        if (!ok) continue;
        z.insert(z.end(), q.begin(), q.end());
        const double content = L.point_content(z);
        if (content < theta) out.push_back(LatticePoint{z, L.apply(z), content});
    }
    return out;
}

/// The shortest-content certificate over an explicit box: the minimum image
/// content among nonzero box points. The box is echoed so the value is
/// reproducible as a certified upper bound with a declared search region.
struct DeltaReport {
    double delta = 0.0;
    LatticePoint argmin;
    SBox box;
};

[[nodiscard]] inline DeltaReport delta_lattice(const SLatticeBasis& L, const SBox& box,
                                               std::uint64_t cap = default_enum_cap) {
    std::optional<LatticePoint> best;
    for (const auto& z : enumerate_box(box, cap)) {
        bool zero = true;
        for (const KElem& c : z) zero = zero && c.is_zero();
        if (zero) continue;
        const double content = L.point_content(z);
        if (!best || content < best->content) best = LatticePoint{z, {}, content};
    }
    if (!best) throw ValidationError("delta_lattice: search box contains no nonzero point");
    best->image = L.apply(best->z);
    return DeltaReport{best->content, *best, box};
}

// ============================================================================
// The improvability <-> short-vector correspondence
// ============================================================================

/// Both sides of the correspondence inequality at one instance and eps.
struct CorrespondenceReport {
    bool improvable = false;
    double eps = 0.0;
    double threshold = 0.0;  // (m+n)^(|S_r|/2 + |S_c|) * eps
    std::optional<LatticePoint> witness_point;
    bool holds = true;  // content < threshold whenever a witness exists
};

/**
 * Checks that an eps-improvable instance forces a short lattice point: the
 * witness of the tightened system, mapped through the flow-translated graph
 * basis, must have content below (m+n)^(|S_r|/2 + |S_c|) eps. Vacuously true
 * when the instance is not improvable at eps.
 */
[[nodiscard]] inline CorrespondenceReport check_correspondence(const DirichletInstance& inst,
                                                               double eps,
                                                               std::uint64_t cap = default_enum_cap) {
    const SConfig& cfg = inst.config();
    int n_real = 0, n_complex = 0;
    for (const Place& v : cfg.places()) {
        n_real += v.kind == PlaceKind::real ? 1 : 0;
        n_complex += v.kind == PlaceKind::complex ? 1 : 0;
    }
    CorrespondenceReport rep;
    rep.eps = eps;
    rep.threshold =
        std::pow(inst.m() + inst.n(), n_real / 2.0 + n_complex) * eps;
    const auto witness = is_improvable_at(inst, eps, cap);
    if (!witness) return rep;
    rep.improvable = true;
    const SLatticeBasis L = flow_lattice(inst);
    std::vector<KElem> z = witness->y;
    z.insert(z.end(), witness->x.begin(), witness->x.end());
    LatticePoint pt{z, L.apply(z), L.point_content(z)};
    rep.holds = pt.content < rep.threshold;
    rep.witness_point = std::move(pt);
    return rep;
}

// ============================================================================
// Covolumes of primitive submodules
// ============================================================================

/**
 * Covolume of the image of a primitive submodule under a lattice basis:
 * sqrt(|D_K|)^rank times the content of the wedge image. With the identity
 * basis this reproduces sqrt(|D_K|)^rank (= 1 over Q), the normalization the
 * unit-covolume lattice space is defined by.
 */
[[nodiscard]] inline double covolume_submodule(const PrimitiveSubmodule& sub,
                                               const SLatticeBasis& h,
                                               WedgeStructure structure = WedgeStructure::generic) {
    if (!(sub.config() == h.config()))
        throw ValidationError("covolume_submodule: place configurations differ");
    if (sub.ambient_dim() != h.dim())
        throw ValidationError("covolume_submodule: ambient dimension mismatch");
    const WedgeVec moved = wedge_action(h.matrices(), sub.wedge(), structure);
    const double root_disc =
        std::sqrt(std::abs(to_double(sub.config().field().discriminant())));
    return std::pow(root_disc, sub.rank()) * moved.content();
}

}  // namespace sadic
