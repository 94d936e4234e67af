#include "noisycw/qcore.hpp"

#include <unsupported/Eigen/MatrixFunctions>

namespace noisycw {

namespace {
const cplx I1(0.0, 1.0);
}

OperatorMatrix s_plus() {
    OperatorMatrix m = OperatorMatrix::Zero();
    m(1, 0) = 1.0;  // |e><g|
    return m;
}

OperatorMatrix s_minus() {
    OperatorMatrix m = OperatorMatrix::Zero();
    m(0, 1) = 1.0;  // |g><e|
    return m;
}

OperatorMatrix s_x() {
    OperatorMatrix m = OperatorMatrix::Zero();
    m(0, 1) = 0.5;
    m(1, 0) = 0.5;
    return m;
}

OperatorMatrix s_z() {
    OperatorMatrix m = OperatorMatrix::Zero();
    m(0, 0) = -0.5;
    m(1, 1) = 0.5;
    return m;
}

OperatorMatrix s_number() {
    OperatorMatrix m = OperatorMatrix::Zero();
    m(1, 1) = 1.0;
    return m;
}

Eigen::Matrix4cd kron22(const OperatorMatrix& a, const OperatorMatrix& b) {
    Eigen::Matrix4cd k;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            k.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
    return k;
}

StateVec vectorize(const OperatorMatrix& rho) {
    StateVec v;
    v << rho(0, 0), rho(1, 0), rho(0, 1), rho(1, 1);
    return v;
}

OperatorMatrix unvectorize(const StateVec& v) {
    OperatorMatrix rho;
    rho << v(0), v(2), v(1), v(3);
    return rho;
}

double hermiticity_defect(const OperatorMatrix& m) {
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

double min_eigenvalue(const OperatorMatrix& rho) {
    Eigen::SelfAdjointEigenSolver<OperatorMatrix> es(0.5 * (rho + rho.adjoint()));
    return es.eigenvalues().minCoeff();
}

LiouvMatrix build_liouvillian(const OperatorMatrix& hamiltonian,
                              const std::vector<OperatorMatrix>& collapse) {
    if (hermiticity_defect(hamiltonian) > 1e-12)
        throw validation_error("build_liouvillian: Hamiltonian is not Hermitian");
    const OperatorMatrix id = OperatorMatrix::Identity();
    LiouvMatrix liouv =
        -I1 * (kron22(id, hamiltonian) - kron22(hamiltonian.transpose(), id));
    for (const auto& c : collapse) {
        if (!c.allFinite())
            throw validation_error("build_liouvillian: collapse operator has non-finite entries");
        const OperatorMatrix cdc = c.adjoint() * c;
        liouv += kron22(c.conjugate(), c);
        liouv -= 0.5 * kron22(id, cdc);
        liouv -= 0.5 * kron22(cdc.transpose(), id);
    }
    return liouv;
}

LiouvMatrix propagate(const LiouvMatrix& liouv, double tau) {
    return (liouv * tau).exp();
}

OperatorMatrix apply_propagator(const LiouvMatrix& prop, const OperatorMatrix& rho) {
    return unvectorize(prop * vectorize(rho));
}

namespace {

OperatorMatrix steady_by_propagation(const LiouvMatrix& liouv) {
    StateVec v = vectorize(0.5 * OperatorMatrix::Identity());
    double t = 1.0;
    for (int k = 0; k < 64; ++k) {
        StateVec w = propagate(liouv, t) * v;
        const cplx tr = w(0) + w(3);
        if (std::abs(tr) < 1e-14)
            throw undefined_normalization_error("steady_state: propagated trace vanished");
        w /= tr;
        if ((w - v).cwiseAbs().maxCoeff() < 1e-13) {
            v = w;
            break;
        }
        v = w;
        t *= 2.0;
    }
    OperatorMatrix rho = unvectorize(v);
    return 0.5 * (rho + rho.adjoint());
}

}  // namespace

OperatorMatrix steady_state(const LiouvMatrix& liouv) {
    Eigen::JacobiSVD<LiouvMatrix> svd(liouv, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const bool degenerate = sv(2) <= sv(0) / 1e10;
    if (!degenerate) {
        const StateVec v = svd.matrixV().col(3);
        const cplx tr = v(0) + v(3);
        if (std::abs(tr) > 1e-9) {
            OperatorMatrix rho = unvectorize(StateVec(v / tr));
            rho = 0.5 * (rho + rho.adjoint());
            if ((liouv * vectorize(rho)).cwiseAbs().maxCoeff() < 1e-9) return rho;
        }
    }
    return steady_by_propagation(liouv);
}

std::vector<OperatorMatrix> evolve_timedep(
    const std::function<OperatorMatrix(double)>& hamiltonian,
    const std::vector<OperatorMatrix>& collapse,
    const OperatorMatrix& rho0,
    const std::vector<double>& t_grid,
    const ode::Options& opt) {
    if (t_grid.empty()) return {};
    for (size_t i = 1; i < t_grid.size(); ++i)
        if (t_grid[i] <= t_grid[i - 1])
            throw validation_error("evolve_timedep: t_grid must be strictly increasing");
    if (hermiticity_defect(hamiltonian(t_grid.front())) > 1e-12)
        throw validation_error("evolve_timedep: Hamiltonian path is not Hermitian");

    LiouvMatrix dissipator = LiouvMatrix::Zero();
    const OperatorMatrix id = OperatorMatrix::Identity();
    for (const auto& c : collapse) {
        if (!c.allFinite())
            throw validation_error("evolve_timedep: collapse operator has non-finite entries");
        const OperatorMatrix cdc = c.adjoint() * c;
        dissipator += kron22(c.conjugate(), c);
        dissipator -= 0.5 * kron22(id, cdc);
        dissipator -= 0.5 * kron22(cdc.transpose(), id);
    }

    auto rhs = [&](double t, const StateVec& y, StateVec& dydt) {
        const OperatorMatrix h = hamiltonian(t);
        const LiouvMatrix lh =
            -I1 * (kron22(id, h) - kron22(h.transpose(), id));
        dydt = (lh + dissipator) * y;
    };

    const auto states = ode::integrate_at(rhs, StateVec(vectorize(rho0)), t_grid, opt);
    std::vector<OperatorMatrix> out;
    out.reserve(states.size());
    for (const auto& v : states) out.push_back(unvectorize(v));
    return out;
}

}  // namespace noisycw
