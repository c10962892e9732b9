#include "transmean/covariance.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace transmean {

FactorSpec FactorSpec::identity(std::size_t dim) {
    return {Kind::identity, dim, 0.0, {}};
}

FactorSpec FactorSpec::ar1(std::size_t dim, double rho) {
    if (!(std::abs(rho) < 1.0)) {
        throw InvalidArgument("ar1 factor: |rho| must be < 1");
    }
    return {Kind::ar1, dim, rho, {}};
}

FactorSpec FactorSpec::compound(std::size_t dim, double rho) {
    if (dim > 1 && !(rho > -1.0 / static_cast<double>(dim - 1) && rho < 1.0)) {
        throw InvalidArgument("compound factor: rho must lie in (-1/(dim-1), 1)");
    }
    return {Kind::compound, dim, rho, {}};
}

FactorSpec FactorSpec::dense(Matrix entries) {
    if (entries.rows() != entries.cols()) {
        throw InvalidArgument("dense factor: matrix must be square");
    }
    if (!entries.isApprox(entries.transpose(), 1e-12)) {
        throw InvalidArgument("dense factor: matrix must be symmetric");
    }
    const auto dim = static_cast<std::size_t>(entries.rows());
    return {Kind::dense, dim, 0.0, std::move(entries)};
}

Matrix FactorSpec::materialize() const {
    const auto n = static_cast<Eigen::Index>(dim);
    switch (kind) {
        case Kind::identity:
            return Matrix::Identity(n, n);
        case Kind::ar1: {
            Matrix m(n, n);
            for (Eigen::Index a = 0; a < n; ++a) {
                for (Eigen::Index b = 0; b < n; ++b) {
                    m(a, b) = std::pow(rho, static_cast<double>(std::abs(a - b)));
                }
            }
            return m;
        }
        case Kind::compound: {
            Matrix m = Matrix::Constant(n, n, rho);
            m.diagonal().setOnes();
            return m;
        }
        case Kind::dense:
            return entries;
    }
    return {};
}

std::string FactorSpec::describe() const {
    std::ostringstream os;
    switch (kind) {
        case Kind::identity: os << "identity(" << dim << ")"; break;
        case Kind::ar1: os << "ar1(" << dim << "," << rho << ")"; break;
        case Kind::compound: os << "compound(" << dim << "," << rho << ")"; break;
        case Kind::dense: os << "dense(" << dim << ")"; break;
    }
    return os.str();
}

CovarianceSpec CovarianceSpec::identity(std::size_t rows, std::size_t cols) {
    CovarianceSpec s;
    s.kind_ = Kind::identity;
    s.rows_ = rows;
    s.cols_ = cols;
    return s;
}

CovarianceSpec CovarianceSpec::kronecker(FactorSpec column_factor, FactorSpec row_factor) {
    CovarianceSpec s;
    s.kind_ = Kind::kronecker;
    s.rows_ = row_factor.dim;
    s.cols_ = column_factor.dim;
    s.column_ = std::move(column_factor);
    s.row_ = std::move(row_factor);
    return s;
}

CovarianceSpec CovarianceSpec::block_diagonal(std::vector<FactorSpec> blocks, std::size_t rows, std::size_t cols) {
    std::size_t total = 0;
    for (const auto& b : blocks) {
        total += b.dim;
    }
    if (total != rows * cols) {
        throw InvalidArgument("block_diagonal covariance: block dims sum to " + std::to_string(total) +
                              ", expected r*c = " + std::to_string(rows * cols));
    }
    CovarianceSpec s;
    s.kind_ = Kind::block_diagonal;
    s.rows_ = rows;
    s.cols_ = cols;
    s.blocks_ = std::move(blocks);
    return s;
}

CovarianceSpec CovarianceSpec::dense(Matrix sigma, std::size_t rows, std::size_t cols) {
    if (static_cast<std::size_t>(sigma.rows()) != rows * cols || sigma.rows() != sigma.cols()) {
        throw InvalidArgument("dense covariance: expected an (r*c) x (r*c) matrix");
    }
    if (!sigma.isApprox(sigma.transpose(), 1e-12)) {
        throw InvalidArgument("dense covariance: matrix must be symmetric");
    }
    CovarianceSpec s;
    s.kind_ = Kind::dense;
    s.rows_ = rows;
    s.cols_ = cols;
    s.dense_ = std::move(sigma);
    return s;
}

CovarianceSpec CovarianceSpec::exchangeable(std::size_t rows, std::size_t cols, double rho) {
    return dense(FactorSpec::compound(rows * cols, rho).materialize(), rows, cols);
}

Matrix CovarianceSpec::materialize() const {
    const std::size_t n = rows_ * cols_;
    if (n > kMaxMaterializedDim) {
        throw InvalidArgument("covariance: r*c = " + std::to_string(n) + " exceeds the materialization limit of " +
                              std::to_string(kMaxMaterializedDim));
    }
    const auto dim = static_cast<Eigen::Index>(n);
    switch (kind_) {
        case Kind::identity:
            return Matrix::Identity(dim, dim);
        case Kind::kronecker: {
            const Matrix col = column_.materialize();
            const Matrix row = row_.materialize();
            const auto r = row.rows();
            Matrix out(dim, dim);
            for (Eigen::Index p = 0; p < col.rows(); ++p) {
                for (Eigen::Index q = 0; q < col.cols(); ++q) {
                    out.block(p * r, q * r, r, r) = col(p, q) * row;
                }
            }
            return out;
        }
        case Kind::block_diagonal: {
            Matrix out = Matrix::Zero(dim, dim);
            Eigen::Index offset = 0;
            for (const auto& b : blocks_) {
                const auto d = static_cast<Eigen::Index>(b.dim);
                out.block(offset, offset, d, d) = b.materialize();
                offset += d;
            }
            return out;
        }
        case Kind::dense:
            return dense_;
    }
    return {};
}

std::string CovarianceSpec::describe() const {
    std::ostringstream os;
    switch (kind_) {
        case Kind::identity: os << "identity"; break;
        case Kind::kronecker: os << "kronecker(" << column_.describe() << "," << row_.describe() << ")"; break;
        case Kind::block_diagonal: {
            os << "block_diagonal(";
            for (std::size_t i = 0; i < blocks_.size(); ++i) {
                os << (i ? "," : "") << blocks_[i].describe();
            }
            os << ")";
            break;
        }
        case Kind::dense: os << "dense"; break;
    }
    return os.str();
}

Matrix symmetric_sqrt(const Matrix& sigma) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sigma);
    if (eig.info() != Eigen::Success) {
        throw InvalidArgument("covariance factor: eigendecomposition failed");
    }
    const Vector& values = eig.eigenvalues();
    if (values.minCoeff() <= 1e-10) {
        throw InvalidArgument("covariance factor is not positive definite (smallest eigenvalue " +
                              std::to_string(values.minCoeff()) + ")");
    }
    const Matrix& vectors = eig.eigenvectors();
    Matrix root = vectors * values.cwiseSqrt().asDiagonal() * vectors.transpose();
    // symmetrize away eigenvector rounding
    return 0.5 * (root + root.transpose());
}

namespace {

Matrix factor_root(const FactorSpec& f) {
    if (f.kind == FactorSpec::Kind::identity) {
        return {};
    }
    return symmetric_sqrt(f.materialize());
}

}  // namespace

CovarianceRoot sqrt_factor(const CovarianceSpec& spec) {
    CovarianceRoot root;
    root.kind_ = spec.kind();
    root.rows_ = spec.n_rows();
    root.cols_ = spec.n_cols();
    switch (spec.kind()) {
        case CovarianceSpec::Kind::identity:
            break;
        case CovarianceSpec::Kind::kronecker:
            root.row_root_ = factor_root(spec.row_factor());
            root.column_root_ = factor_root(spec.column_factor());
            break;
        case CovarianceSpec::Kind::block_diagonal:
            for (const auto& b : spec.blocks()) {
                root.block_roots_.push_back(factor_root(b));
                root.block_dims_.push_back(b.dim);
            }
            break;
        case CovarianceSpec::Kind::dense:
            root.dense_root_ = symmetric_sqrt(spec.dense_matrix());
            break;
    }
    return root;
}

void CovarianceRoot::apply(Matrix& noise) const {
    if (static_cast<std::size_t>(noise.rows()) != rows_ || static_cast<std::size_t>(noise.cols()) != cols_) {
        throw InvalidArgument("covariance root: noise shape does not match the covariance spec");
    }
    switch (kind_) {
        case CovarianceSpec::Kind::identity:
            return;
        case CovarianceSpec::Kind::kronecker:
            if (row_root_.size() > 0) {
                noise = row_root_ * noise;
            }
            if (column_root_.size() > 0) {
                noise = noise * column_root_;
            }
            return;
        case CovarianceSpec::Kind::block_diagonal: {
            Eigen::Map<Vector> v(noise.data(), noise.size());
            Eigen::Index offset = 0;
            for (std::size_t i = 0; i < block_roots_.size(); ++i) {
                const auto d = static_cast<Eigen::Index>(block_dims_[i]);
                if (block_roots_[i].size() > 0) {
                    v.segment(offset, d) = block_roots_[i] * v.segment(offset, d);
                }
                offset += d;
            }
            return;
        }
        case CovarianceSpec::Kind::dense: {
            Eigen::Map<Vector> v(noise.data(), noise.size());
            v = dense_root_ * v;
            return;
        }
    }
}

}  // namespace transmean
