// Copyright 2026 The spcut Authors
// SPDX-License-Identifier: Apache-2.0
#include "spcut/eigensystem.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "spcut/error.hpp"

namespace spcut {

const char* to_string(ErrorCode code) noexcept
{
    switch (code) {
        case ErrorCode::invalid_domain: return "invalid domain";
        case ErrorCode::outside_domain: return "point outside domain";
        case ErrorCode::invalid_index: return "invalid mode index";
        case ErrorCode::zero_datum: return "zero initial datum";
        case ErrorCode::resonance: return "resonance";
        case ErrorCode::tied_spectrum: return "tied spectrum";
        case ErrorCode::invalid_time: return "invalid time";
        case ErrorCode::invalid_argument: return "invalid argument";
        case ErrorCode::dimension_mismatch: return "dimension mismatch";
        case ErrorCode::wrong_case: return "wrong damping case";
        case ErrorCode::subcritical_route: return "subcritical route";
        case ErrorCode::degenerate_spec: return "degenerate noise spec";
        case ErrorCode::unsupported: return "unsupported combination";
        case ErrorCode::not_psd: return "matrix not positive semidefinite";
        case ErrorCode::mark_out_of_range: return "mark out of range";
        case ErrorCode::unordered_jumps: return "unordered jump times";
        case ErrorCode::schedule_rejected: return "schedule rejected";
        case ErrorCode::config: return "config error";
    }
    return "unknown error";
}

namespace {

using Frac = std::pair<__int128, __int128>;

__int128 gcd128(__int128 a, __int128 b)
{
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
        __int128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

Frac reduce(Frac f)
{
    __int128 g = gcd128(f.first, f.second);
    if (g > 1) {
        f.first /= g;
        f.second /= g;
    }
    return f;
}

bool frac_less(const Frac& a, const Frac& b) { return a.first * b.second < b.first * a.second; }
bool frac_equal(const Frac& a, const Frac& b) { return a.first * b.second == b.first * a.second; }

bool axes_exact(std::span<const BoxAxis> dims)
{
    if (dims.empty()) return false;
    return std::all_of(dims.begin(), dims.end(), [&](const BoxAxis& a) {
        return a.exact.has_value() && a.unit == dims.front().unit;
    });
}

Frac exact_key(std::span<const BoxAxis> dims, const EigenSystem::MultiIndex& idx)
{
    Frac sum{0, 1};
    for (std::size_t i = 0; i < dims.size(); ++i) {
        const Rational& r = *dims[i].exact;
        // (k * den / num)^2
        Frac term{static_cast<__int128>(idx[i]) * idx[i] * r.den * r.den,
                  static_cast<__int128>(r.num) * r.num};
        sum = reduce({sum.first * term.second + term.first * sum.second, sum.second * term.second});
    }
    return sum;
}

double axis_lambda(const BoxAxis& a, int k)
{
    double s = k * (std::numbers::pi / a.length);
    return s * s;
}

}  // namespace

BoxAxis BoxAxis::pi_multiple(Rational r, int modes)
{
    BoxAxis a;
    a.length = std::numbers::pi * static_cast<double>(r.num) / static_cast<double>(r.den);
    a.modes = modes;
    a.exact = r;
    a.unit = LengthUnit::pi;
    return a;
}

BoxAxis BoxAxis::rational(Rational r, int modes)
{
    BoxAxis a;
    a.length = static_cast<double>(r.num) / static_cast<double>(r.den);
    a.modes = modes;
    a.exact = r;
    a.unit = LengthUnit::one;
    return a;
}

EigenSystem::EigenSystem(std::vector<BoxAxis> dims, std::vector<double> lambdas,
                         std::vector<MultiIndex> index_map)
    : dims_(std::move(dims)), lambdas_(std::move(lambdas)), index_map_(std::move(index_map))
{
    require(!dims_.empty(), ErrorCode::invalid_domain, "box needs at least one axis");
    for (const auto& a : dims_) {
        require(a.length > 0 && std::isfinite(a.length), ErrorCode::invalid_domain,
                "side lengths must be positive");
        require(a.modes >= 1, ErrorCode::invalid_domain, "modes per axis must be >= 1");
        if (a.exact) {
            require(a.exact->num > 0 && a.exact->den > 0, ErrorCode::invalid_domain,
                    "exact side length must be a positive rational");
        }
    }
    require(lambdas_.size() == index_map_.size(), ErrorCode::dimension_mismatch,
            "lambdas and index_map differ in length");
    for (const auto& idx : index_map_) {
        require(idx.size() == dims_.size(), ErrorCode::dimension_mismatch,
                "multi-index rank differs from box dimension");
        for (std::size_t i = 0; i < idx.size(); ++i) {
            require(idx[i] >= 1 && idx[i] <= dims_[i].modes, ErrorCode::invalid_index,
                    "multi-index entry out of range");
        }
    }
    exact_ = axes_exact(dims_);
    if (exact_) {
        exact_keys_.reserve(index_map_.size());
        for (const auto& idx : index_map_) {
            exact_keys_.push_back(exact_key(dims_, idx));
        }
    }
}

bool EigenSystem::same_eigenvalue(std::size_t i, std::size_t j) const
{
    require(i < size() && j < size(), ErrorCode::invalid_index, "mode index out of range");
    if (exact_) {
        return frac_equal(exact_keys_[i], exact_keys_[j]);
    }
    double a = lambdas_[i];
    double b = lambdas_[j];
    return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b));
}

bool EigenSystem::is_simple() const
{
    for (std::size_t k = 1; k < size(); ++k) {
        if (same_eigenvalue(k - 1, k)) return false;
    }
    return true;
}

nlohmann::json EigenSystem::to_json() const
{
    nlohmann::json dims = nlohmann::json::array();
    for (const auto& a : dims_) {
        nlohmann::json d{{"length", a.length}, {"modes", a.modes}};
        if (a.exact) {
            d[a.unit == LengthUnit::pi ? "length_pi" : "length_rational"] = {a.exact->num,
                                                                             a.exact->den};
        }
        dims.push_back(std::move(d));
    }
    return {{"dims", dims}, {"lambdas", lambdas_}, {"index_map", index_map_}};
}

namespace {

BoxAxis axis_from_json(const nlohmann::json& d)
{
    int modes = d.at("modes").get<int>();
    if (d.contains("length_pi")) {
        auto r = d.at("length_pi").get<std::vector<std::int64_t>>();
        require(r.size() == 2, ErrorCode::invalid_domain, "length_pi must be [num, den]");
        return BoxAxis::pi_multiple({r[0], r[1]}, modes);
    }
    if (d.contains("length_rational")) {
        auto r = d.at("length_rational").get<std::vector<std::int64_t>>();
        require(r.size() == 2, ErrorCode::invalid_domain, "length_rational must be [num, den]");
        return BoxAxis::rational({r[0], r[1]}, modes);
    }
    BoxAxis a;
    a.length = d.at("length").get<double>();
    a.modes = modes;
    return a;
}

}  // namespace

EigenSystem EigenSystem::from_json(const nlohmann::json& j)
{
    std::vector<BoxAxis> dims;
    for (const auto& d : j.at("dims")) {
        dims.push_back(axis_from_json(d));
    }
    return EigenSystem(std::move(dims), j.at("lambdas").get<std::vector<double>>(),
                       j.at("index_map").get<std::vector<MultiIndex>>());
}

EigenSystemPtr build_box_eigensystem(std::vector<BoxAxis> dims, std::optional<std::size_t> max_modes)
{
    require(!dims.empty(), ErrorCode::invalid_domain, "box needs at least one axis");
    std::size_t total = 1;
    for (const auto& a : dims) {
        require(a.length > 0 && std::isfinite(a.length), ErrorCode::invalid_domain,
                "side lengths must be positive");
        require(a.modes >= 1, ErrorCode::invalid_domain, "modes per axis must be >= 1");
        total *= static_cast<std::size_t>(a.modes);
    }

    struct Entry {
        EigenSystem::MultiIndex idx;
        double lambda;
        Frac key;
    };
    bool exact = axes_exact(dims);
    std::vector<Entry> entries;
    entries.reserve(total);
    EigenSystem::MultiIndex idx(dims.size(), 1);
    for (std::size_t n = 0; n < total; ++n) {
        Entry e{idx, 0.0, {0, 1}};
        if (exact) {
            e.key = exact_key(dims, idx);
            double v = static_cast<double>(e.key.first) / static_cast<double>(e.key.second);
            e.lambda = dims.front().unit == LengthUnit::pi ? v : std::numbers::pi * std::numbers::pi * v;
        } else {
            for (std::size_t i = 0; i < dims.size(); ++i) {
                e.lambda += axis_lambda(dims[i], idx[i]);
            }
        }
        entries.push_back(std::move(e));
        // odometer increment, last axis fastest
        for (std::size_t i = dims.size(); i-- > 0;) {
            if (++idx[i] <= dims[i].modes) break;
            idx[i] = 1;
        }
    }

    std::stable_sort(entries.begin(), entries.end(), [&](const Entry& a, const Entry& b) {
        if (exact) {
            if (!frac_equal(a.key, b.key)) return frac_less(a.key, b.key);
        } else if (a.lambda != b.lambda) {
            return a.lambda < b.lambda;
        }
        return a.idx < b.idx;
    });

    std::size_t keep = max_modes ? std::min(*max_modes, entries.size()) : entries.size();
    require(keep >= 1, ErrorCode::invalid_domain, "truncation level must be >= 1");
    std::vector<double> lambdas;
    std::vector<EigenSystem::MultiIndex> index_map;
    lambdas.reserve(keep);
    index_map.reserve(keep);
    for (std::size_t k = 0; k < keep; ++k) {
        lambdas.push_back(entries[k].lambda);
        index_map.push_back(std::move(entries[k].idx));
    }
    return std::make_shared<const EigenSystem>(std::move(dims), std::move(lambdas),
                                               std::move(index_map));
}

double eval_eigenfunction(const EigenSystem& system, std::size_t k, std::span<const double> x)
{
    require(k < system.size(), ErrorCode::invalid_index, "mode index out of range");
    require(x.size() == system.dimension(), ErrorCode::dimension_mismatch,
            "point rank differs from box dimension");
    const auto& idx = system.multi_index(k);
    double value = 1.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const BoxAxis& a = system.dims()[i];
        require(x[i] >= 0.0 && x[i] <= a.length, ErrorCode::outside_domain,
                "point lies outside the box");
        if (x[i] == 0.0 || x[i] == a.length) return 0.0;
        value *= std::sqrt(2.0 / a.length) * std::sin(idx[i] * std::numbers::pi * x[i] / a.length);
    }
    return value;
}

EigenCheck check_eigensystem(const EigenSystem& system, std::size_t max_check, int points_per_axis)
{
    const std::size_t n_check = std::min(max_check, system.size());
    const int n = points_per_axis;

    // Per-axis node samples of the 1D factors; trapezoid on nodes 0..n.
    auto sample = [&](std::size_t axis, int kk) {
        const BoxAxis& a = system.dims()[axis];
        std::vector<double> f(static_cast<std::size_t>(n) + 1);
        for (int i = 0; i <= n; ++i) {
            double x = a.length * i / n;
            f[static_cast<std::size_t>(i)] =
                (i == 0 || i == n) ? 0.0
                                   : std::sqrt(2.0 / a.length) * std::sin(kk * std::numbers::pi * x / a.length);
        }
        return f;
    };
    auto inner = [&](std::size_t axis, const std::vector<double>& f, const std::vector<double>& g) {
        double h = system.dims()[axis].length / n;
        double s = 0.0;
        for (std::size_t i = 1; i + 1 < f.size(); ++i) s += f[i] * g[i];
        return s * h;
    };
    auto energy = [&](std::size_t axis, const std::vector<double>& f) {
        double h = system.dims()[axis].length / n;
        double s = 0.0;
        for (std::size_t i = 0; i + 1 < f.size(); ++i) {
            double d = f[i + 1] - f[i];
            s += d * d;
        }
        return s / h;
    };

    EigenCheck out;
    for (std::size_t p = 0; p < n_check; ++p) {
        const auto& ip = system.multi_index(p);
        for (std::size_t q = p; q < n_check; ++q) {
            const auto& iq = system.multi_index(q);
            double g = 1.0;
            for (std::size_t axis = 0; axis < system.dimension(); ++axis) {
                g *= inner(axis, sample(axis, ip[axis]), sample(axis, iq[axis]));
            }
            double target = p == q ? 1.0 : 0.0;
            out.max_gram_error = std::max(out.max_gram_error, std::abs(g - target));
        }
        double dirichlet = 0.0;
        for (std::size_t axis = 0; axis < system.dimension(); ++axis) {
            double term = energy(axis, sample(axis, ip[axis]));
            for (std::size_t other = 0; other < system.dimension(); ++other) {
                if (other == axis) continue;
                auto f = sample(other, ip[other]);
                term *= inner(other, f, f);
            }
            dirichlet += term;
        }
        double rel = std::abs(dirichlet - system.lambda(p)) / system.lambda(p);
        out.max_rayleigh_rel_error = std::max(out.max_rayleigh_rel_error, rel);
    }
    out.pass = out.max_gram_error <= 1e-10 && out.max_rayleigh_rel_error <= 1e-3;
    return out;
}

ModeCoefficients::ModeCoefficients(EigenSystemPtr system, std::vector<double> values)
    : system_(std::move(system)), values_(std::move(values))
{
    require(system_ != nullptr, ErrorCode::invalid_argument, "null eigensystem");
    require(values_.size() == system_->size(), ErrorCode::dimension_mismatch,
            "coefficient count differs from mode count");
}

ModeCoefficients ModeCoefficients::zeros(EigenSystemPtr system)
{
    std::size_t n = system->size();
    return ModeCoefficients(std::move(system), std::vector<double>(n, 0.0));
}

double ModeCoefficients::norm() const
{
    double s = 0.0;
    for (double v : values_) s += v * v;
    return std::sqrt(s);
}

bool ModeCoefficients::is_zero() const
{
    return std::all_of(values_.begin(), values_.end(), [](double v) { return v == 0.0; });
}

ModeCoefficients ModeCoefficients::scaled(double c) const
{
    auto out = *this;
    for (double& v : out.values_) v *= c;
    return out;
}

}  // namespace spcut
