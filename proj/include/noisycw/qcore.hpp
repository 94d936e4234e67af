#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "noisycw/common.hpp"
#include "noisycw/rk.hpp"

namespace noisycw {

using OperatorMatrix = Eigen::Matrix2cd;
using LiouvMatrix = Eigen::Matrix4cd;
using StateVec = Eigen::Vector4cd;

// Ladder and spin-1/2 operators in the {|g>, |e>} basis.
// Sx = (S+ + S-)/2, Sz = S+S- - I/2.
OperatorMatrix s_plus();
OperatorMatrix s_minus();
OperatorMatrix s_x();
OperatorMatrix s_z();
OperatorMatrix s_number();  // S+S- = |e><e|

Eigen::Matrix4cd kron22(const OperatorMatrix& a, const OperatorMatrix& b);

// Column-major stacking: vec(rho) = [rho_gg, rho_eg, rho_ge, rho_ee].
StateVec vectorize(const OperatorMatrix& rho);
OperatorMatrix unvectorize(const StateVec& v);

// rho' = -i[H, rho] + sum_k ( L_k rho L_k+ - 1/2 {L_k+ L_k, rho} )
// H must be Hermitian to 1e-12; collapse entries must be finite.
LiouvMatrix build_liouvillian(const OperatorMatrix& hamiltonian,
                              const std::vector<OperatorMatrix>& collapse);

// Unique trace-one kernel element of L.  Uses an SVD null-space solve and
// falls back to long-time propagation when the second-smallest singular
// value signals a degenerate kernel (condition ratio 1e10).
OperatorMatrix steady_state(const LiouvMatrix& liouv);

// Full propagator exp(L tau) acting on vectorized states.
LiouvMatrix propagate(const LiouvMatrix& liouv, double tau);

OperatorMatrix apply_propagator(const LiouvMatrix& prop, const OperatorMatrix& rho);

// Time-dependent master equation with static collapse channels, integrated
// adaptively; returns the state at every grid time.  t_grid.front() is the
// initial time.
std::vector<OperatorMatrix> evolve_timedep(
    const std::function<OperatorMatrix(double)>& hamiltonian,
    const std::vector<OperatorMatrix>& collapse,
    const OperatorMatrix& rho0,
    const std::vector<double>& t_grid,
    const ode::Options& opt = {});

// Diagnostics used by tests and postcondition checks.
double hermiticity_defect(const OperatorMatrix& m);
double min_eigenvalue(const OperatorMatrix& rho);

}  // namespace noisycw
