#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "qnd/linalg.hpp"

namespace qnd {

/// Tensor-factor layout of a composite Hilbert space. Factor 0 is the
/// leftmost (most significant) index of the Kronecker product.
class HilbertLayout {
public:
    struct Factor {
        std::string name;
        std::size_t dim;
    };

    HilbertLayout() = default;
    explicit HilbertLayout(std::vector<Factor> factors);

    std::size_t dim() const { return dim_; }
    std::size_t num_factors() const { return factors_.size(); }
    const Factor& factor(std::size_t i) const { return factors_.at(i); }
    const std::vector<Factor>& factors() const { return factors_; }

    /// Lifts a single-factor operator into the full space.
    Matrix embed(const Matrix& local, std::size_t factor_index) const;

    /// Identity on the full space.
    Matrix identity() const;

    /// Flat basis index of a product state given per-factor levels.
    std::size_t index_of(const std::vector<std::size_t>& levels) const;
    std::vector<std::size_t> levels_of(std::size_t index) const;

    bool operator==(const HilbertLayout& other) const;

private:
    std::vector<Factor> factors_;
    std::size_t dim_ = 1;
};

/// Isometric encoding of a subspace spanned by selected product-basis
/// vectors of a parent layout.
class SubspaceEncoding {
public:
    SubspaceEncoding() = default;
    SubspaceEncoding(std::size_t parent_dim, std::vector<std::size_t> basis);

    std::size_t parent_dim() const { return parent_dim_; }
    std::size_t dim() const { return basis_.size(); }
    const std::vector<std::size_t>& basis() const { return basis_; }

    Matrix project(const Matrix& op) const;
    Matrix lift(const Matrix& reduced) const;

    /// Weight of `rho` outside the encoded span (max modulus of entries
    /// with at least one index outside the span).
    double leakage(const Matrix& rho) const;

private:
    std::size_t parent_dim_ = 0;
    std::vector<std::size_t> basis_;
};

}  // namespace qnd
