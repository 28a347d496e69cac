// Copyright 2026 The spcut Authors
// SPDX-License-Identifier: Apache-2.0
//
// Explicit eigensystem of the Dirichlet Laplacian on a box (0,L_1)x...x(0,L_d).
//
// Modes are indexed 0-based in ascending eigenvalue order. The eigenvalue of
// the multi-index (k_1,...,k_d) is sum_i (k_i pi / L_i)^2 and the eigenfunction
// is prod_i sqrt(2/L_i) sin(k_i pi x_i / L_i).
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "json.hpp"

namespace spcut {

//! Positive rational num/den.
struct Rational {
    std::int64_t num = 1;
    std::int64_t den = 1;
};

//! Unit in which an exact side length is expressed.
enum class LengthUnit { one, pi };

struct BoxAxis {
    double length = 0.0;
    int modes = 0;
    //! Exact side length (in `unit`); enables exact eigenvalue tie detection.
    std::optional<Rational> exact;
    LengthUnit unit = LengthUnit::one;

    static BoxAxis pi_multiple(Rational r, int modes);
    static BoxAxis rational(Rational r, int modes);
};

class EigenSystem {
  public:
    using MultiIndex = std::vector<int>;

    EigenSystem(std::vector<BoxAxis> dims, std::vector<double> lambdas,
                std::vector<MultiIndex> index_map);

    std::size_t size() const noexcept { return lambdas_.size(); }
    std::size_t dimension() const noexcept { return dims_.size(); }
    std::span<const double> lambdas() const noexcept { return lambdas_; }
    double lambda(std::size_t k) const { return lambdas_.at(k); }
    std::span<const BoxAxis> dims() const noexcept { return dims_; }
    const MultiIndex& multi_index(std::size_t k) const { return index_map_.at(k); }

    //! True when lambda_i == lambda_j, exactly if all axes are exact in a common unit.
    bool same_eigenvalue(std::size_t i, std::size_t j) const;
    bool has_exact_ties() const noexcept { return exact_; }

    //! True when no two modes share an eigenvalue.
    bool is_simple() const;

    nlohmann::json to_json() const;
    static EigenSystem from_json(const nlohmann::json& j);

  private:
    std::vector<BoxAxis> dims_;
    std::vector<double> lambdas_;
    std::vector<MultiIndex> index_map_;
    // Reduced fractions sum_i (k_i den_i / num_i)^2, valid only when exact_.
    std::vector<std::pair<__int128, __int128>> exact_keys_;
    bool exact_ = false;
};

using EigenSystemPtr = std::shared_ptr<const EigenSystem>;

/*!
 * Enumerate all multi-indices 1..modes_i per axis, sort ascending by
 * eigenvalue (ties broken lexicographically), and keep the first
 * `max_modes` (all if absent).
 */
EigenSystemPtr build_box_eigensystem(std::vector<BoxAxis> dims,
                                     std::optional<std::size_t> max_modes = {});

double eval_eigenfunction(const EigenSystem& system, std::size_t k, std::span<const double> x);

//! Eigen-consistency diagnostics: quadrature Gram error and Rayleigh-quotient error.
struct EigenCheck {
    double max_gram_error = 0.0;
    double max_rayleigh_rel_error = 0.0;
    bool pass = false;
};

/*!
 * Check orthonormality by midpoint quadrature and check the stored
 * eigenvalues against the Dirichlet energy of each eigenfunction
 * (finite-difference gradient). Only the first `max_check` modes are
 * examined; a corrupted eigenvalue table fails the Rayleigh test.
 */
EigenCheck check_eigensystem(const EigenSystem& system, std::size_t max_check = 8,
                             int points_per_axis = 256);

//! Element of the truncated Hilbert space as coefficients against the eigenbasis.
class ModeCoefficients {
  public:
    ModeCoefficients(EigenSystemPtr system, std::vector<double> values);
    static ModeCoefficients zeros(EigenSystemPtr system);

    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t k) const { return values_[k]; }
    double& operator[](std::size_t k) { return values_[k]; }
    std::span<const double> values() const noexcept { return values_; }
    const EigenSystemPtr& system() const noexcept { return system_; }

    double norm() const;
    bool is_zero() const;

    ModeCoefficients scaled(double c) const;

  private:
    EigenSystemPtr system_;
    std::vector<double> values_;
};

}  // namespace spcut
