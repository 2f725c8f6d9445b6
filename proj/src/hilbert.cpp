#include "qnd/hilbert.hpp"

#include <algorithm>

namespace qnd {

HilbertLayout::HilbertLayout(std::vector<Factor> factors) : factors_(std::move(factors)) {
    dim_ = 1;
    for (const auto& f : factors_) {
        if (f.dim == 0) throw InvalidInput("Hilbert factor '" + f.name + "' has dimension 0");
        dim_ *= f.dim;
    }
}

Matrix HilbertLayout::embed(const Matrix& local, std::size_t factor_index) const {
    if (factor_index >= factors_.size()) throw InvalidInput("factor index out of range");
    const auto& f = factors_[factor_index];
    if (static_cast<std::size_t>(local.rows()) != f.dim || static_cast<std::size_t>(local.cols()) != f.dim) {
        throw InvalidInput("operator does not match dimension of factor '" + f.name + "'");
    }
    std::size_t left = 1;
    for (std::size_t i = 0; i < factor_index; ++i) left *= factors_[i].dim;
    std::size_t right = dim_ / (left * f.dim);
    const auto l = static_cast<Eigen::Index>(left);
    const auto r = static_cast<Eigen::Index>(right);
    return kron(kron(Matrix::Identity(l, l), local), Matrix::Identity(r, r));
}

Matrix HilbertLayout::identity() const {
    const auto d = static_cast<Eigen::Index>(dim_);
    return Matrix::Identity(d, d);
}

std::size_t HilbertLayout::index_of(const std::vector<std::size_t>& levels) const {
    if (levels.size() != factors_.size()) throw InvalidInput("level vector does not match layout");
    std::size_t idx = 0;
    for (std::size_t i = 0; i < factors_.size(); ++i) {
        if (levels[i] >= factors_[i].dim) throw InvalidInput("level exceeds factor dimension");
        idx = idx * factors_[i].dim + levels[i];
    }
    return idx;
}

std::vector<std::size_t> HilbertLayout::levels_of(std::size_t index) const {
    std::vector<std::size_t> levels(factors_.size());
    for (std::size_t i = factors_.size(); i-- > 0;) {
        levels[i] = index % factors_[i].dim;
        index /= factors_[i].dim;
    }
    return levels;
}

bool HilbertLayout::operator==(const HilbertLayout& other) const {
    if (factors_.size() != other.factors_.size()) return false;
    for (std::size_t i = 0; i < factors_.size(); ++i) {
        if (factors_[i].dim != other.factors_[i].dim || factors_[i].name != other.factors_[i].name) return false;
    }
    return true;
}

SubspaceEncoding::SubspaceEncoding(std::size_t parent_dim, std::vector<std::size_t> basis)
    : parent_dim_(parent_dim), basis_(std::move(basis)) {
    for (auto b : basis_) {
        if (b >= parent_dim_) throw InvalidInput("subspace basis index outside parent space");
    }
    auto sorted = basis_;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw InvalidInput("duplicate subspace basis index");
    }
}

Matrix SubspaceEncoding::project(const Matrix& op) const {
    const auto n = static_cast<Eigen::Index>(basis_.size());
    Matrix out(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            out(i, j) = op(static_cast<Eigen::Index>(basis_[i]), static_cast<Eigen::Index>(basis_[j]));
        }
    }
    return out;
}

Matrix SubspaceEncoding::lift(const Matrix& reduced) const {
    const auto d = static_cast<Eigen::Index>(parent_dim_);
    Matrix out = Matrix::Zero(d, d);
    const auto n = static_cast<Eigen::Index>(basis_.size());
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            out(static_cast<Eigen::Index>(basis_[i]), static_cast<Eigen::Index>(basis_[j])) = reduced(i, j);
        }
    }
    return out;
}

double SubspaceEncoding::leakage(const Matrix& rho) const {
    std::vector<bool> inside(parent_dim_, false);
    for (auto b : basis_) inside[b] = true;
    double worst = 0.0;
    for (Eigen::Index i = 0; i < rho.rows(); ++i) {
        for (Eigen::Index j = 0; j < rho.cols(); ++j) {
            if (inside[static_cast<std::size_t>(i)] && inside[static_cast<std::size_t>(j)]) continue;
            worst = std::max(worst, std::abs(rho(i, j)));
        }
    }
    return worst;
}

}  // namespace qnd
