#pragma once

#include <algorithm>
#include <complex>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "sadic/common.hpp"
#include "sadic/dirichlet.hpp"
#include "sadic/local_arith.hpp"
#include "sadic/number_field.hpp"
#include "sadic/padic.hpp"
#include "sadic/s_adic.hpp"

namespace sadic {

// ============================================================================
// Index sets
// ============================================================================

/// All sorted j-element subsets of {0, ..., dim-1} in lexicographic order;
/// the coefficient layout of every rank-j exterior power in this library.
[[nodiscard]] inline std::vector<std::vector<int>> wedge_index_sets(int dim, int j) {
    if (dim < 1) throw ValidationError("wedge_index_sets: dimension must be >= 1");
    if (j < 1 || j > dim) throw ValidationError("wedge_index_sets: rank must lie in [1, dim]");
    std::vector<std::vector<int>> sets;
    std::vector<int> cur(static_cast<size_t>(j));
    for (int i = 0; i < j; ++i) cur[static_cast<size_t>(i)] = i;
    while (true) {
        sets.push_back(cur);
        int k = j - 1;
        while (k >= 0 && cur[static_cast<size_t>(k)] == dim - j + k) --k;
        if (k < 0) break;
        ++cur[static_cast<size_t>(k)];
        for (int i = k + 1; i < j; ++i) cur[static_cast<size_t>(i)] = cur[static_cast<size_t>(i - 1)] + 1;
    }
    return sets;
}

namespace detail {

[[nodiscard]] inline size_t wedge_index_of(const std::vector<std::vector<int>>& sets,
                                           const std::vector<int>& I) {
    const auto it = std::lower_bound(sets.begin(), sets.end(), I);
    if (it == sets.end() || *it != I) throw InvariantError("wedge_index_of: unknown index set");
    return static_cast<size_t>(it - sets.begin());
}

// ----------------------------------------------------------------------------
// Typed cores: the same formulas over KElem, double, complex<double>, and
// truncated p-adics. T needs +, *, unary -, and a copyable zero seed.
// ----------------------------------------------------------------------------

template <typename T>
using Mat = std::vector<std::vector<T>>;

template <typename T>
[[nodiscard]] T minor_det(const Mat<T>& g, const std::vector<int>& rows,
                          const std::vector<int>& cols, const T& zero) {
    if (rows.size() == 1)
        return g[static_cast<size_t>(rows[0])][static_cast<size_t>(cols[0])];
    T acc = zero;
    std::vector<int> sub_rows(rows.begin() + 1, rows.end());
    for (size_t c = 0; c < cols.size(); ++c) {
        std::vector<int> sub_cols;
        for (size_t cc = 0; cc < cols.size(); ++cc)
            if (cc != c) sub_cols.push_back(cols[cc]);
        T term = g[static_cast<size_t>(rows[0])][static_cast<size_t>(cols[c])] *
                 minor_det(g, sub_rows, sub_cols, zero);
        if (c % 2 == 1) term = -term;
        acc = acc + term;
    }
    return acc;
}

/// Full minor expansion of the rank-j action: out_I = sum_J det(g[I,J]) w_J.
template <typename T>
[[nodiscard]] std::vector<T> wedge_generic_typed(const Mat<T>& g, const std::vector<T>& w,
                                                 const std::vector<std::vector<int>>& sets,
                                                 const T& zero) {
    std::vector<T> out(sets.size(), zero);
    for (size_t oi = 0; oi < sets.size(); ++oi)
        for (size_t ji = 0; ji < sets.size(); ++ji)
            out[oi] = out[oi] + minor_det(g, sets[oi], sets[ji], zero) * w[ji];
    return out;
}

/// Action of the row-unipotent matrix [[1, f], [0, I]]: basis vectors with
/// 0 in the index set are invariant; e_I with 0 not in I picks up, for each
/// i in I at (1-based) position k, the term (-1)^(k-1) f_i e_{I u {0} - {i}}.
template <typename T>
[[nodiscard]] std::vector<T> wedge_funip_typed(const std::vector<T>& f, const std::vector<T>& w,
                                               const std::vector<std::vector<int>>& sets) {
    std::vector<T> out = w;
    for (size_t ii = 0; ii < sets.size(); ++ii) {
        const std::vector<int>& I = sets[ii];
        if (I[0] == 0) continue;
        for (size_t k = 0; k < I.size(); ++k) {
            std::vector<int> J{0};
            for (size_t kk = 0; kk < I.size(); ++kk)
                if (kk != k) J.push_back(I[kk]);
            T term = f[static_cast<size_t>(I[k] - 1)] * w[ii];
            if (k % 2 == 1) term = -term;
            const size_t oj = wedge_index_of(sets, J);
            out[oj] = out[oj] + term;
        }
    }
    return out;
}

/// Action of diag(d_0, ..., d_{dim-1}): coefficient-wise scaling by the
/// product of the diagonal entries over the index set.
template <typename T>
[[nodiscard]] std::vector<T> wedge_diag_typed(const std::vector<T>& d, const std::vector<T>& w,
                                              const std::vector<std::vector<int>>& sets) {
    std::vector<T> out;
    out.reserve(sets.size());
    for (size_t ii = 0; ii < sets.size(); ++ii) {
        T scale = d[static_cast<size_t>(sets[ii][0])];
        for (size_t k = 1; k < sets[ii].size(); ++k)
            scale = scale * d[static_cast<size_t>(sets[ii][k])];
        out.push_back(scale * w[ii]);
    }
    return out;
}

[[nodiscard]] inline bool lv_is_exact_zero(const LocalValue& x) {
    return x.is_exact() && x.exact_part().is_zero();
}

[[nodiscard]] inline bool lv_is_exact_one(const LocalValue& x) {
    return x.is_exact() && x.exact_part() == KElem::one(x.exact_part().field());
}

}  // namespace detail

// ============================================================================
// Wedge action on completion coefficients
// ============================================================================

/// Structural shortcut declared by the caller; the structured modes are
/// validated against the matrix shape and agree with the generic expansion.
enum class WedgeStructure { generic, f_unipotent, diagonal };

/**
 * Rank-j exterior-power action of a dim x dim matrix on a coefficient vector
 * at one place. Coefficients follow wedge_index_sets(dim, j). Arithmetic is
 * exact when every operand is exact, otherwise runs in the completion model;
 * truncated p-adic cancellation surfaces as PrecisionError.
 */
[[nodiscard]] inline std::vector<LocalValue> wedge_action_at(
    const Place& v, const LocalMatrix& g, int dim, int j, const std::vector<LocalValue>& coeffs,
    WedgeStructure structure = WedgeStructure::generic) {
    const auto sets = wedge_index_sets(dim, j);
    if (g.size() != static_cast<size_t>(dim))
        throw ValidationError("wedge_action_at: matrix row count != dim");
    for (const auto& row : g) {
        if (row.size() != static_cast<size_t>(dim))
            throw ValidationError("wedge_action_at: matrix column count != dim");
        for (const LocalValue& a : row) a.validate_for(v);
    }
    if (coeffs.size() != sets.size())
        throw ValidationError("wedge_action_at: coefficient count != C(dim, j)");
    for (const LocalValue& c : coeffs) c.validate_for(v);

    // The operands the chosen mode actually reads.
    std::vector<const LocalValue*> operands;
    for (const LocalValue& c : coeffs) operands.push_back(&c);
    if (structure == WedgeStructure::f_unipotent) {
        if (!detail::lv_is_exact_one(g[0][0]))
            throw ValidationError("wedge_action_at: f-unipotent matrix needs 1 at (0,0)");
        for (int i = 1; i < dim; ++i)
            for (int k = 0; k < dim; ++k) {
                const LocalValue& e = g[static_cast<size_t>(i)][static_cast<size_t>(k)];
                if (i == k ? !detail::lv_is_exact_one(e) : !detail::lv_is_exact_zero(e))
                    throw ValidationError(
                        "wedge_action_at: matrix is not row-unipotent of the declared shape");
            }
        for (int k = 1; k < dim; ++k) operands.push_back(&g[0][static_cast<size_t>(k)]);
    } else if (structure == WedgeStructure::diagonal) {
        for (int i = 0; i < dim; ++i)
            for (int k = 0; k < dim; ++k)
                if (i != k && !detail::lv_is_exact_zero(g[static_cast<size_t>(i)][static_cast<size_t>(k)]))
                    throw ValidationError("wedge_action_at: matrix is not diagonal");
        for (int i = 0; i < dim; ++i) operands.push_back(&g[static_cast<size_t>(i)][static_cast<size_t>(i)]);
    } else {
        for (const auto& row : g)
            for (const LocalValue& a : row) operands.push_back(&a);
    }

    bool all_exact = true;
    int prec = padic_default_prec;
    for (const LocalValue* x : operands) {
        all_exact = all_exact && x->is_exact();
        if (x->kind() == LocalValue::Kind::padic_value)
            prec = std::min(prec, x->padic_part().prec());
    }

    // Run the selected core in the promoted scalar domain.
    const auto run = [&](auto to_scalar, auto from_scalar, auto zero) -> std::vector<LocalValue> {
        using T = decltype(zero);
        std::vector<T> w;
        for (const LocalValue& c : coeffs) w.push_back(to_scalar(c));
        std::vector<T> out;
        if (structure == WedgeStructure::f_unipotent) {
            std::vector<T> f;
            for (int k = 1; k < dim; ++k) f.push_back(to_scalar(g[0][static_cast<size_t>(k)]));
            out = detail::wedge_funip_typed(f, w, sets);
        } else if (structure == WedgeStructure::diagonal) {
            std::vector<T> d;
            for (int i = 0; i < dim; ++i)
                d.push_back(to_scalar(g[static_cast<size_t>(i)][static_cast<size_t>(i)]));
            out = detail::wedge_diag_typed(d, w, sets);
        } else {
            detail::Mat<T> gm;
            for (const auto& row : g) {
                std::vector<T> r;
                for (const LocalValue& a : row) r.push_back(to_scalar(a));
                gm.push_back(std::move(r));
            }
            out = detail::wedge_generic_typed(gm, w, sets, zero);
        }
        std::vector<LocalValue> res;
        for (const T& x : out) res.push_back(from_scalar(x));
        return res;
    };

    if (all_exact) {
        const NumberField& F = coeffs[0].exact_part().field();
        return run([](const LocalValue& x) { return x.exact_part(); },
                   [](const KElem& x) { return LocalValue::exact(x); }, KElem::zero(F));
    }
    switch (v.kind) {
        case PlaceKind::real:
            return run([](const LocalValue& x) { return detail::lv_real(x); },
                       [](double x) { return LocalValue::real(x); }, 0.0);
        case PlaceKind::complex:
            return run([](const LocalValue& x) { return detail::lv_complex(x); },
                       [](const std::complex<double>& x) {
                           return LocalValue::complex_value(x.real(), x.imag());
                       },
                       std::complex<double>{0.0, 0.0});
        case PlaceKind::finite:
            return run([&](const LocalValue& x) { return detail::lv_padic(v, x, prec); },
                       [](const PadicApprox& x) { return LocalValue::padic(x); },
                       PadicApprox::zero(v.p, prec));
    }
    throw InvariantError("wedge_action_at: unreachable place kind");
}

/**
 * A rank-j element of the exterior power of the S-adele space: per place, one
 * coefficient per sorted index set of wedge_index_sets(dim, j).
 */
class WedgeVec {
public:
    WedgeVec(SConfig cfg, int dim, int j, std::vector<std::vector<LocalValue>> coeffs)
        : cfg_(std::move(cfg)), dim_(dim), j_(j), coeffs_(std::move(coeffs)) {
        const size_t want = wedge_index_sets(dim_, j_).size();
        if (coeffs_.size() != cfg_.size())
            throw ValidationError("WedgeVec: need one coefficient row per place");
        for (size_t vi = 0; vi < coeffs_.size(); ++vi) {
            if (coeffs_[vi].size() != want)
                throw ValidationError("WedgeVec: coefficient count != C(dim, j)");
            for (const LocalValue& c : coeffs_[vi]) c.validate_for(cfg_.places()[vi]);
        }
    }

    /// The diagonally embedded wedge of exact coordinates (same at each place).
    static WedgeVec diagonal(const SConfig& cfg, int dim, int j, const std::vector<KElem>& coords) {
        std::vector<LocalValue> row;
        row.reserve(coords.size());
        for (const KElem& c : coords) row.push_back(LocalValue::exact(c));
        return WedgeVec(cfg, dim, j, std::vector<std::vector<LocalValue>>(cfg.size(), row));
    }

    [[nodiscard]] const SConfig& config() const noexcept { return cfg_; }
    [[nodiscard]] int dim() const noexcept { return dim_; }
    [[nodiscard]] int rank() const noexcept { return j_; }
    [[nodiscard]] const std::vector<LocalValue>& at_place(size_t vi) const { return coeffs_.at(vi); }

    /// Content: product over places of the norm of the coefficient vector.
    [[nodiscard]] double content() const {
        double c = 1.0;
        for (size_t vi = 0; vi < cfg_.size(); ++vi) {
            const Place& v = cfg_.places()[vi];
            std::vector<double> mags;
            mags.reserve(coeffs_[vi].size());
            for (const LocalValue& x : coeffs_[vi]) mags.push_back(detail::lv_abs(v, x));
            c *= detail::place_norm2(v, mags);
        }
        return c;
    }

private:
    SConfig cfg_;
    int dim_, j_;
    std::vector<std::vector<LocalValue>> coeffs_;
};

/// Applies per-place matrices to every place of a wedge vector.
[[nodiscard]] inline WedgeVec wedge_action(const std::vector<LocalMatrix>& g, const WedgeVec& w,
                                           WedgeStructure structure = WedgeStructure::generic) {
    if (g.size() != w.config().size())
        throw ValidationError("wedge_action: need one matrix per place");
    std::vector<std::vector<LocalValue>> out;
    for (size_t vi = 0; vi < g.size(); ++vi)
        out.push_back(wedge_action_at(w.config().places()[vi], g[vi], w.dim(), w.rank(),
                                      w.at_place(vi), structure));
    return WedgeVec(w.config(), w.dim(), w.rank(), std::move(out));
}

// ============================================================================
// Primitive submodules
// ============================================================================

/// The unit group of the ring of integers (finite for every supported field).
[[nodiscard]] inline std::vector<KElem> unit_group(const NumberField& F) {
    const KElem one = KElem::one(F);
    if (F.is_rationals()) return {one, -one};
    const KElem w = KElem::omega(F);
    if (F.d() == 1) return {one, w, -one, -w};
    if (F.d() == 3) return {one, w, w - one, -one, -w, one - w};
    return {one, -one};
}

namespace detail {

/// gcd in the ring of integers, which is norm-Euclidean for every supported
/// field: divide with the remainder of smallest norm among the four integer
/// roundings of the exact quotient.
[[nodiscard]] inline KElem ok_gcd(KElem x, KElem y) {
    while (!y.is_zero()) {
        const KElem q = x / y;
        KElem best = x;
        bool found = false;
        const Int fa = rat_floor(q.a()), fb = rat_floor(q.b());
        for (const Int& da : {fa, Int(fa + 1)})
            for (const Int& db : {fb, Int(fb + 1)}) {
                const KElem cand(x.field(), Rat(da), Rat(db));
                const KElem r = x - cand * y;
                if (!found || rat_abs(r.norm()) < rat_abs(best.norm())) {
                    best = r;
                    found = true;
                }
            }
        x = y;
        y = best;
    }
    return x;
}

/// True iff the S-integer content ideal of the coordinates is all of O_S
/// (every supported ring O_S is a PID, so the content is a single gcd).
[[nodiscard]] inline bool s_content_is_unit(const SConfig& cfg,
                                            const std::vector<KElem>& coords) {
    const NumberField& F = cfg.field();
    // Clear the S-denominators; the scaling factor is an S-unit.
    Int scale(1);
    for (const KElem& c : coords) {
        scale = boost::multiprecision::lcm(scale, den(c.a()));
        scale = boost::multiprecision::lcm(scale, den(c.b()));
    }
    KElem g = KElem::zero(F);
    for (const KElem& c : coords) {
        const KElem ci = c * KElem(F, Rat(scale));
        if (ci.is_zero()) continue;
        g = g.is_zero() ? ci : (F.is_rationals()
                                    ? KElem(F, Rat(boost::multiprecision::gcd(num(g.a()), num(ci.a()))))
                                    : ok_gcd(g, ci));
    }
    if (g.is_zero()) throw InvariantError("s_content_is_unit: zero coordinate vector");
    // Divide out the primes of S.
    for (size_t vi = 1; vi < cfg.size(); ++vi) {
        const Place& v = cfg.places()[vi];
        while (true) {
            const KElem q = g / v.pi;
            if (!q.is_integral()) break;
            g = q;
        }
    }
    return rat_abs(g.norm()) == 1;
}

}  // namespace detail

/**
 * A rank-j direct summand of O_S^dim, held as an explicit S-integer basis
 * together with its exact decomposable wedge (the j x j minors of the basis
 * matrix). Construction verifies membership, rank, and primitivity: the O_S
 * content of the wedge coordinates must be a unit, which over a PID is
 * equivalent to the basis extending to a basis of O_S^dim.
 */
class PrimitiveSubmodule {
public:
    PrimitiveSubmodule(SConfig cfg, std::vector<std::vector<KElem>> basis)
        : cfg_(std::move(cfg)), basis_(std::move(basis)) {
        if (basis_.empty()) throw ValidationError("PrimitiveSubmodule: rank must be >= 1");
        dim_ = static_cast<int>(basis_[0].size());
        j_ = static_cast<int>(basis_.size());
        if (j_ > dim_) throw ValidationError("PrimitiveSubmodule: rank exceeds ambient dimension");
        for (const auto& vec : basis_) {
            if (vec.size() != static_cast<size_t>(dim_))
                throw ValidationError("PrimitiveSubmodule: ragged basis");
            for (const KElem& c : vec)
                if (!is_s_integer(c, cfg_))
                    throw ValidationError("PrimitiveSubmodule: basis entry is not an S-integer");
        }
        const auto sets = wedge_index_sets(dim_, j_);
        const KElem zero = KElem::zero(cfg_.field());
        std::vector<int> rows(static_cast<size_t>(j_));
        for (int r = 0; r < j_; ++r) rows[static_cast<size_t>(r)] = r;
        bool nonzero = false;
        for (const auto& I : sets) {
            const KElem w = detail::minor_det(basis_, rows, I, zero);
            nonzero = nonzero || !w.is_zero();
            wedge_.push_back(w);
        }
        if (!nonzero) throw ValidationError("PrimitiveSubmodule: basis is not linearly independent");
        if (!detail::s_content_is_unit(cfg_, wedge_))
            throw ValidationError("PrimitiveSubmodule: wedge content is not a unit (not primitive)");
    }

    [[nodiscard]] const SConfig& config() const noexcept { return cfg_; }
    [[nodiscard]] int ambient_dim() const noexcept { return dim_; }
    [[nodiscard]] int rank() const noexcept { return j_; }
    [[nodiscard]] const std::vector<std::vector<KElem>>& basis() const noexcept { return basis_; }
    /// Exact wedge coordinates in wedge_index_sets(ambient_dim, rank) order.
    [[nodiscard]] const std::vector<KElem>& wedge_coords() const noexcept { return wedge_; }

    /// The wedge as a diagonal S-adele vector, ready for wedge_action.
    [[nodiscard]] WedgeVec wedge() const { return WedgeVec::diagonal(cfg_, dim_, j_, wedge_); }

private:
    SConfig cfg_;
    std::vector<std::vector<KElem>> basis_;
    int dim_ = 0, j_ = 0;
    std::vector<KElem> wedge_;
};

namespace detail {

/// Canonical dedupe key: scale the wedge by each unit, take the
/// lexicographically least coordinate string.
[[nodiscard]] inline std::string wedge_canonical_key(const NumberField& F,
                                                     const std::vector<KElem>& w) {
    std::string best;
    for (const KElem& u : unit_group(F)) {
        std::string key;
        for (const KElem& c : w) {
            const KElem s = u * c;
            key += s.a().str() + "," + s.b().str() + ";";
        }
        if (best.empty() || key < best) best = std::move(key);
    }
    return best;
}

}  // namespace detail

/**
 * Every primitive rank-j submodule of O_S^dim spanned by basis vectors whose
 * coordinates satisfy |x|_v <= height at the archimedean place and |x|_v <= 1
 * at the finite places, duplicate-free modulo unit rescaling of the wedge.
 * Enumeration order is canonical, so the result is deterministic.
 */
[[nodiscard]] inline std::vector<PrimitiveSubmodule> enumerate_primitive_submodules(
    const SConfig& cfg, int dim, int j, const Rat& height, std::uint64_t cap = default_enum_cap) {
    if (j < 1) throw ValidationError("enumerate_primitive_submodules: rank must be >= 1");
    if (j > dim) throw ValidationError("enumerate_primitive_submodules: rank exceeds dimension");
    std::vector<PrimitiveSubmodule> out;
    std::set<std::string> seen;

    // The vector pool: all nonzero points of the dim-fold box, canonical order.
    SBox vbox(cfg, dim);
    for (int c = 0; c < dim; ++c) {
        vbox.set_bound(0, c, height);
        for (size_t vi = 1; vi < cfg.size(); ++vi) vbox.set_finite_exponent(vi, c, 0);
    }
    std::vector<std::vector<KElem>> vectors;
    for (auto& x : enumerate_box(vbox, cap)) {
        bool zero = true;
        for (const KElem& c : x) zero = zero && c.is_zero();
        if (!zero) vectors.push_back(std::move(x));
    }
    double combos = 1.0;
    for (int r = 0; r < j; ++r)
        combos *= static_cast<double>(vectors.size() - static_cast<size_t>(r)) / (r + 1);
    if (combos > static_cast<double>(cap))
        throw CapError("enumerate_primitive_submodules: ~" + std::to_string(combos) +
                       " candidate bases exceed cap " + std::to_string(cap));
    if (vectors.size() < static_cast<size_t>(j)) return out;

    std::vector<size_t> comb(static_cast<size_t>(j));
    for (int r = 0; r < j; ++r) comb[static_cast<size_t>(r)] = static_cast<size_t>(r);
    while (true) {
        std::vector<std::vector<KElem>> basis;
        for (size_t r = 0; r < comb.size(); ++r) basis.push_back(vectors[comb[r]]);
        try {
            PrimitiveSubmodule sub(cfg, std::move(basis));
            const std::string key = detail::wedge_canonical_key(cfg.field(), sub.wedge_coords());
            if (seen.insert(key).second) out.push_back(std::move(sub));
        } catch (const ValidationError&) {
            // dependent or imprimitive basis: not a candidate
        }
        int k = j - 1;
        while (k >= 0 && comb[static_cast<size_t>(k)] == vectors.size() - static_cast<size_t>(j - k)) --k;
        if (k < 0) break;
        ++comb[static_cast<size_t>(k)];
        for (int r = k + 1; r < j; ++r) comb[static_cast<size_t>(r)] = comb[static_cast<size_t>(r - 1)] + 1;
    }
    return out;
}

}  // namespace sadic
