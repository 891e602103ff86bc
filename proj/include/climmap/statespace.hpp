#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "climmap/errors.hpp"

namespace climmap {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Continuous-time LTI model: dx/dt = A x + B u, y = C x + D u.
struct StateSpaceModel {
    Mat A; // n x n
    Mat B; // n x m
    Mat C; // p x n
    Mat D; // p x m

    std::vector<std::string> state_names;
    std::vector<std::string> input_names;
    std::vector<std::string> output_names;

    Eigen::Index n() const { return A.rows(); }
    Eigen::Index m() const { return B.cols(); }
    Eigen::Index p() const { return C.rows(); }

    // Throws DimensionError / NumericError on an ill-formed model.
    void validate() const;
};

// Zero-order-hold discretization of a StateSpaceModel at step dt.
struct DiscreteModel {
    Mat Ad;
    Mat Bd;
    Mat C;
    Mat D;
    double dt = 0.0; // seconds

    Eigen::Index n() const { return Ad.rows(); }
    Eigen::Index m() const { return Bd.cols(); }
    Eigen::Index p() const { return C.rows(); }
};

// Matrix exponential by scaling-and-squaring with a degree-13 Pade approximant.
Mat expm(const Mat& M);

// ZOH discretization via the augmented exponential expm([[A,B],[0,0]] * dt);
// valid for singular A.
DiscreteModel discretize_zoh(const StateSpaceModel& model, double dt);

// Per-step consumer of (step index, output vector).
using OutputSink = std::function<void(std::size_t, const Vec&)>;

// Per-step input supplier: fills u with the m-vector for step k.
using InputSource = std::function<void(std::size_t, Vec&)>;

// Streams y_k = C x_k + D u_k, x_{k+1} = Ad x_k + Bd u_k for k = 0..n_steps-1.
// Returns the final state x_N. Throws DivergenceError on a non-finite state.
Vec simulate(const DiscreteModel& dmodel, const InputSource& inputs, std::size_t n_steps,
             const Vec& x0, const OutputSink& sink);

// Convenience overload for materialized input sequences (tests, small runs).
Vec simulate(const DiscreteModel& dmodel, const std::vector<Vec>& inputs, const Vec& x0,
             const OutputSink& sink);

// D - C A^-1 B by LU solve. Throws SingularError when A is singular.
Mat dc_gain(const StateSpaceModel& model);

// Solves A x_ss = -B u0; returns (x_ss, y_ss = C x_ss + D u0).
std::pair<Vec, Vec> steady_state(const StateSpaceModel& model, const Vec& u0);

} // namespace climmap
