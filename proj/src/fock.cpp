#include "spreadchan/fock.hpp"

#include <array>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "spreadchan/error.hpp"

namespace spreadchan {

namespace {

void require_finite(const CMat &m, const char *what) {
    if (!m.allFinite()) {
        fail(ErrorKind::numeric, std::string(what) + ": non-finite entries");
    }
}

void require_square(const CMat &m, const char *what) {
    if (m.rows() != m.cols()) {
        fail(ErrorKind::shape, std::string(what) + ": matrix is not square");
    }
    if (m.rows() < 2) {
        fail(ErrorKind::invalid_dimension, std::string(what) + ": dimension below 2");
    }
}

double leakage_of(const CVec &amps) {
    const auto d = amps.size();
    return std::norm(amps[d - 1]) + std::norm(amps[d - 2]);
}

// Higham (2005) scaling and squaring with a [13/13] Pade approximant.
CMat pade13_exp(const CMat &a_in) {
    static constexpr std::array<double, 14> b = {
        64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
        129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
        1323241920.0,        40840800.0,          960960.0,           16380.0,
        182.0,               1.0};
    constexpr double theta13 = 5.371920351148152;

    const double norm1 = a_in.cwiseAbs().colwise().sum().maxCoeff();
    int squarings = 0;
    if (norm1 > theta13) {
        squarings = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
    }
    const CMat a = a_in / std::ldexp(1.0, squarings);
    const auto n = a.rows();
    const CMat id = CMat::Identity(n, n);
    const CMat a2 = a * a;
    const CMat a4 = a2 * a2;
    const CMat a6 = a4 * a2;

    const CMat u_inner = a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 +
                         b[3] * a2 + b[1] * id;
    const CMat u = a * u_inner;
    const CMat v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 +
                   b[0] * id;

    CMat r = (v - u).partialPivLu().solve(v + u);
    for (int i = 0; i < squarings; ++i) {
        r = r * r;
    }
    return r;
}

}  // namespace

FockDimension::FockDimension(int dim) : dim_(dim) {
    if (dim < 2) {
        fail(ErrorKind::invalid_dimension, "Fock dimension must be at least 2, got " + std::to_string(dim));
    }
}

double tail_leakage(std::span<const double> populations) {
    const auto d = populations.size();
    if (d < 2) {
        fail(ErrorKind::invalid_dimension, "leakage needs at least two levels");
    }
    return populations[d - 1] + populations[d - 2];
}

StateVector StateVector::normalized(CVec amplitudes) {
    if (!amplitudes.allFinite()) {
        fail(ErrorKind::numeric, "state amplitudes are not finite");
    }
    const double norm = amplitudes.norm();
    if (norm == 0.0) {
        fail(ErrorKind::numeric, "cannot normalize the zero vector");
    }
    amplitudes /= norm;
    return StateVector(std::move(amplitudes));
}

StateVector::StateVector(CVec amplitudes) : amplitudes_(std::move(amplitudes)), leakage_(0.0) {
    if (amplitudes_.size() < 2) {
        fail(ErrorKind::invalid_dimension, "state vector needs at least two levels");
    }
    if (!amplitudes_.allFinite()) {
        fail(ErrorKind::numeric, "state amplitudes are not finite");
    }
    const double norm2 = amplitudes_.squaredNorm();
    if (std::abs(norm2 - 1.0) > 1e-10) {
        fail(ErrorKind::numeric, "state is not normalized (norm^2 = " + std::to_string(norm2) + ")");
    }
    leakage_ = leakage_of(amplitudes_);
}

DensityOperator::DensityOperator(CMat matrix) : matrix_(std::move(matrix)), leakage_(0.0), min_eigenvalue_(0.0) {
    require_square(matrix_, "density operator");
    require_finite(matrix_, "density operator");
    const double asym = (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff();
    if (asym > 1e-10) {
        fail(ErrorKind::numeric, "density operator is not Hermitian (residue " + std::to_string(asym) + ")");
    }
    matrix_ = 0.5 * (matrix_ + matrix_.adjoint()).eval();
    const double trace = matrix_.trace().real();
    if (std::abs(trace - 1.0) > 1e-10) {
        fail(ErrorKind::numeric, "density operator trace is " + std::to_string(trace));
    }
    Eigen::SelfAdjointEigenSolver<CMat> solver(matrix_, Eigen::EigenvaluesOnly);
    min_eigenvalue_ = solver.eigenvalues().minCoeff();
    if (min_eigenvalue_ < -1e-10) {
        fail(ErrorKind::numeric, "density operator has eigenvalue " + std::to_string(min_eigenvalue_));
    }
    const auto d = matrix_.rows();
    leakage_ = matrix_(d - 1, d - 1).real() + matrix_(d - 2, d - 2).real();
}

DensityOperator DensityOperator::from_pure(const StateVector &psi) {
    const CVec &v = psi.amplitudes();
    return DensityOperator(v * v.adjoint());
}

Operator::Operator(CMat matrix) : matrix_(std::move(matrix)) {
    require_square(matrix_, "operator");
}

bool Operator::is_hermitian(double tol) const {
    const double scale = std::max(1.0, matrix_.cwiseAbs().maxCoeff());
    return (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff() <= tol * scale;
}

bool Operator::is_anti_hermitian(double tol) const {
    const double scale = std::max(1.0, matrix_.cwiseAbs().maxCoeff());
    return (matrix_ + matrix_.adjoint()).cwiseAbs().maxCoeff() <= tol * scale;
}

Operator operator*(const Operator &a, const Operator &b) {
    if (a.matrix_.rows() != b.matrix_.rows()) {
        fail(ErrorKind::shape, "operator dimensions differ");
    }
    return Operator(a.matrix_ * b.matrix_);
}

Operator operator+(const Operator &a, const Operator &b) {
    if (a.matrix_.rows() != b.matrix_.rows()) {
        fail(ErrorKind::shape, "operator dimensions differ");
    }
    return Operator(a.matrix_ + b.matrix_);
}

Operator operator-(const Operator &a, const Operator &b) {
    if (a.matrix_.rows() != b.matrix_.rows()) {
        fail(ErrorKind::shape, "operator dimensions differ");
    }
    return Operator(a.matrix_ - b.matrix_);
}

Operator operator*(cplx s, const Operator &a) {
    return Operator(s * a.matrix_);
}

Ladder make_ladder(FockDimension dim) {
    const int d = dim.value();
    CMat a = CMat::Zero(d, d);
    for (int n = 1; n < d; ++n) {
        a(n - 1, n) = std::sqrt(static_cast<double>(n));
    }
    CMat adag = a.adjoint();
    return Ladder{Operator(std::move(a)), Operator(std::move(adag))};
}

Operator identity(FockDimension dim) {
    return Operator(CMat::Identity(dim.value(), dim.value()));
}

Operator number_operator(FockDimension dim) {
    const int d = dim.value();
    CMat n = CMat::Zero(d, d);
    for (int k = 0; k < d; ++k) {
        n(k, k) = static_cast<double>(k);
    }
    return Operator(std::move(n));
}

Operator mat_exp(const Operator &op) {
    const CMat &m = op.matrix();
    require_finite(m, "mat_exp");
    if (op.is_anti_hermitian(1e-14)) {
        // op = -iH with H Hermitian.
        const CMat h = cplx(0.0, 1.0) * m;
        Eigen::SelfAdjointEigenSolver<CMat> solver(0.5 * (h + h.adjoint()));
        if (solver.info() != Eigen::Success) {
            fail(ErrorKind::numeric, "mat_exp: eigendecomposition failed");
        }
        const RVec &lambda = solver.eigenvalues();
        CVec phases(lambda.size());
        for (Eigen::Index i = 0; i < lambda.size(); ++i) {
            phases[i] = std::polar(1.0, -lambda[i]);
        }
        const CMat &v = solver.eigenvectors();
        return Operator(v * phases.asDiagonal() * v.adjoint());
    }
    CMat r = pade13_exp(m);
    require_finite(r, "mat_exp result");
    return Operator(std::move(r));
}

cplx overlap(const StateVector &psi, const StateVector &chi) {
    if (psi.amplitudes().size() != chi.amplitudes().size()) {
        fail(ErrorKind::shape, "overlap: dimensions differ");
    }
    return psi.amplitudes().dot(chi.amplitudes());
}

double fidelity(const StateVector &psi, const StateVector &chi) {
    return std::norm(overlap(psi, chi));
}

double mean_number(const StateVector &psi) {
    const CVec &v = psi.amplitudes();
    double acc = 0.0;
    for (Eigen::Index n = 0; n < v.size(); ++n) {
        acc += static_cast<double>(n) * std::norm(v[n]);
    }
    return acc;
}

double mean_number(const DensityOperator &rho) {
    const CMat &m = rho.matrix();
    double acc = 0.0;
    for (Eigen::Index n = 0; n < m.rows(); ++n) {
        acc += static_cast<double>(n) * m(n, n).real();
    }
    return acc;
}

double identity_deviation(const CMat &m, int block) {
    const int b = std::min<int>(block, static_cast<int>(m.rows()));
    return (m.topLeftCorner(b, b) - CMat::Identity(b, b)).cwiseAbs().maxCoeff();
}

}  // namespace spreadchan
