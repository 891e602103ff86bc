#include "climmap/statespace.hpp"

#include <cmath>

namespace climmap {

void StateSpaceModel::validate() const {
    if (A.rows() != A.cols())
        throw DimensionError("A must be square");
    if (A.rows() < 1 || B.cols() < 1 || C.rows() < 1)
        throw DimensionError("model dimensions must be at least 1");
    if (B.rows() != A.rows())
        throw DimensionError("B rows != n");
    if (C.cols() != A.rows())
        throw DimensionError("C cols != n");
    if (D.rows() != C.rows())
        throw DimensionError("D rows != p");
    if (D.cols() != B.cols())
        throw DimensionError("D cols != m");
    if (!A.allFinite() || !B.allFinite() || !C.allFinite() || !D.allFinite())
        throw NumericError("model matrices contain non-finite entries");
}

namespace {

// Degree-13 Pade approximant evaluated as in Higham's algorithm.
Mat pade13(const Mat& M) {
    static const double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                               1187353796428800.0,  129060195264000.0,   10559470521600.0,
                               670442572800.0,      33522128640.0,       1323241920.0,
                               40840800.0,          960960.0,            16380.0,
                               182.0,               1.0};
    const Eigen::Index n = M.rows();
    const Mat I = Mat::Identity(n, n);
    const Mat M2 = M * M;
    const Mat M4 = M2 * M2;
    const Mat M6 = M4 * M2;
    const Mat U = M * (M6 * (b[13] * M6 + b[11] * M4 + b[9] * M2) + b[7] * M6 + b[5] * M4 +
                       b[3] * M2 + b[1] * I);
    const Mat V =
        M6 * (b[12] * M6 + b[10] * M4 + b[8] * M2) + b[6] * M6 + b[4] * M4 + b[2] * M2 + b[0] * I;
    return Eigen::PartialPivLU<Mat>(V - U).solve(V + U);
}

} // namespace

Mat expm(const Mat& M) {
    if (M.rows() != M.cols())
        throw DimensionError("expm requires a square matrix");
    if (!M.allFinite())
        throw NumericError("expm input contains non-finite entries");

    // theta_13 for the degree-13 approximant
    const double theta = 5.371920351148152;
    const double norm1 = M.cwiseAbs().colwise().sum().maxCoeff();

    int squarings = 0;
    if (norm1 > theta)
        squarings = static_cast<int>(std::ceil(std::log2(norm1 / theta)));

    Mat R = pade13(M / std::ldexp(1.0, squarings));
    for (int i = 0; i < squarings; ++i)
        R = R * R;
    return R;
}

DiscreteModel discretize_zoh(const StateSpaceModel& model, double dt) {
    model.validate();
    if (dt <= 0.0)
        throw ArgumentError("dt must be positive");

    const Eigen::Index n = model.n();
    const Eigen::Index m = model.m();

    Mat aug = Mat::Zero(n + m, n + m);
    aug.topLeftCorner(n, n) = model.A;
    aug.topRightCorner(n, m) = model.B;
    const Mat E = expm(aug * dt);

    DiscreteModel d;
    d.Ad = E.topLeftCorner(n, n);
    d.Bd = E.topRightCorner(n, m);
    d.C = model.C;
    d.D = model.D;
    d.dt = dt;
    return d;
}

Vec simulate(const DiscreteModel& dmodel, const InputSource& inputs, std::size_t n_steps,
             const Vec& x0, const OutputSink& sink) {
    if (n_steps < 1)
        throw ArgumentError("simulate requires at least one step");
    if (x0.size() != dmodel.n())
        throw DimensionError("x0 length != n");

    Vec x = x0;
    Vec u(dmodel.m());
    Vec y(dmodel.p());
    for (std::size_t k = 0; k < n_steps; ++k) {
        inputs(k, u);
        y.noalias() = dmodel.C * x;
        y.noalias() += dmodel.D * u;
        if (sink)
            sink(k, y);
        x = dmodel.Ad * x + dmodel.Bd * u;
        if (!x.allFinite())
            throw DivergenceError(k, "non-finite state");
    }
    return x;
}

Vec simulate(const DiscreteModel& dmodel, const std::vector<Vec>& inputs, const Vec& x0,
             const OutputSink& sink) {
    return simulate(
        dmodel, [&inputs](std::size_t k, Vec& u) { u = inputs[k]; }, inputs.size(), x0, sink);
}

namespace {

Eigen::FullPivLU<Mat> invertible_lu(const Mat& A) {
    Eigen::FullPivLU<Mat> lu(A);
    if (!lu.isInvertible())
        throw SingularError("A is singular");
    return lu;
}

} // namespace

Mat dc_gain(const StateSpaceModel& model) {
    model.validate();
    auto lu = invertible_lu(model.A);
    return model.D - model.C * lu.solve(model.B);
}

std::pair<Vec, Vec> steady_state(const StateSpaceModel& model, const Vec& u0) {
    model.validate();
    if (u0.size() != model.m())
        throw DimensionError("u0 length != m");
    auto lu = invertible_lu(model.A);
    Vec x_ss = lu.solve(-(model.B * u0));
    Vec y_ss = model.C * x_ss + model.D * u0;
    return {x_ss, y_ss};
}

} // namespace climmap
