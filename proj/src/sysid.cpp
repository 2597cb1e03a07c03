#include "tiltwing/sysid.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

namespace tiltwing {

Wrench predict_sample(const AeroParams& params, const SweepSample& s,
                      const VehicleGeometry& geo, std::span<const WingSegment> segments) {
    RigidBodyState state;
    state.velocity = s.flow_speed * Vec3(std::cos(s.flow_angle), 0.0, std::sin(s.flow_angle));
    ActuatorCommand cmd;
    cmd.chi = s.chi;
    cmd.epsilon = s.epsilon;
    cmd.T_r = s.T_r;
    cmd.T_l = s.T_l;
    cmd.T_t = s.T_t;
    return vehicle_wrench(state, cmd, Vec3::Zero(), params, geo, segments);
}

Eigen::VectorXd residuals(const AeroParams& params, const std::vector<SweepSample>& samples,
                          const VehicleGeometry& geo, std::span<const WingSegment> segments,
                          const ChannelWeights& wts) {
    if (samples.empty()) {
        throw std::invalid_argument("residuals: no samples");
    }
    Eigen::VectorXd r(6 * static_cast<Eigen::Index>(samples.size()));
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const Wrench w = predict_sample(params, samples[i], geo, segments);
        const auto k = static_cast<Eigen::Index>(6 * i);
        r.segment<3>(k) = (w.force - samples[i].force) / wts.force_scale;
        r.segment<3>(k + 3) = (w.torque - samples[i].torque) / wts.torque_scale;
    }
    return r;
}

TiltSlope differential_tilt_slope(const AeroParams& params, const VehicleGeometry& geo,
                                  std::span<const WingSegment> segments,
                                  const TiltSlopeCondition& c) {
    if (c.points < 3 || !(c.max_epsilon > 0.0)) {
        throw std::invalid_argument("tilt slope sweep needs >= 3 points and a positive range");
    }
    RigidBodyState state;
    state.velocity = Vec3(c.airspeed, 0.0, 0.0);
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, syy = 0.0;
    const int n = c.points;
    for (int i = 0; i < n; ++i) {
        const double eps = -c.max_epsilon + 2.0 * c.max_epsilon * i / (n - 1);
        ActuatorCommand cmd;
        cmd.chi = c.chi;
        cmd.epsilon = eps;
        cmd.T_r = cmd.T_l = c.thrust_per_rotor;
        const double x = rad2deg(2.0 * eps);
        const double y = -wing_wrench(state, cmd, Vec3::Zero(), params, geo, segments).torque.x();
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
    }
    const double sxx_c = sxx - sx * sx / n;
    const double sxy_c = sxy - sx * sy / n;
    const double syy_c = syy - sy * sy / n;
    TiltSlope out;
    out.slope = sxy_c / sxx_c;
    out.intercept = (sy - out.slope * sx) / n;
    out.r_squared = syy_c > 0.0 ? (sxy_c * sxy_c) / (sxx_c * syy_c) : 1.0;
    return out;
}

namespace {

using ParamVec = std::array<double, AeroParams::kCount>;

double param_scale(double v) { return std::max(std::abs(v), 1e-3); }

struct Problem {
    const std::vector<SweepSample>& samples;
    const VehicleGeometry& geo;
    std::span<const WingSegment> segments;
    const FitOptions& opt;
    ParamVec prior{};

    Eigen::Index data_rows() const { return 6 * static_cast<Eigen::Index>(samples.size()); }
    Eigen::Index prior_rows() const {
        return opt.prior_weight > 0.0 ? static_cast<Eigen::Index>(AeroParams::kCount) : 0;
    }
    Eigen::Index rows() const {
        return data_rows() + prior_rows() + (opt.slope_target ? 1 : 0);
    }

    Eigen::VectorXd eval(const ParamVec& p) const {
        const AeroParams params = AeroParams::from_vector(p);
        Eigen::VectorXd r(rows());
        r.head(data_rows()) = residuals(params, samples, geo, segments, opt.weights);
        for (Eigen::Index k = 0; k < prior_rows(); ++k) {
            const auto j = static_cast<std::size_t>(k);
            r(data_rows() + k) = opt.prior_weight * (p[j] - prior[j]) / param_scale(prior[j]);
        }
        if (opt.slope_target) {
            const TiltSlope ts =
                differential_tilt_slope(params, geo, segments, opt.slope_condition);
            r(r.size() - 1) = opt.slope_weight * (ts.slope - *opt.slope_target) / *opt.slope_target;
        }
        return r;
    }

    Eigen::MatrixXd jacobian(const ParamVec& p, const Eigen::VectorXd& r0,
                             const std::vector<std::size_t>& cols, double rel, bool central) const {
        Eigen::MatrixXd J(rows(), static_cast<Eigen::Index>(cols.size()));
        for (std::size_t c = 0; c < cols.size(); ++c) {
            const std::size_t j = cols[c];
            const double h = rel * param_scale(p[j]);
            ParamVec pp = p;
            pp[j] += h;
            if (central) {
                ParamVec pm = p;
                pm[j] -= h;
                J.col(static_cast<Eigen::Index>(c)) = (eval(pp) - eval(pm)) / (2.0 * h);
            } else {
                J.col(static_cast<Eigen::Index>(c)) = (eval(pp) - r0) / h;
            }
        }
        return J;
    }
};

// Valid enough to evaluate: finite and with positive stall angles and width.
bool evaluable(const ParamVec& p) {
    try {
        AeroParams::from_vector(p).validate();
    } catch (const std::invalid_argument&) {
        return false;
    }
    return true;
}

std::vector<std::size_t> all_slots() {
    std::vector<std::size_t> v(AeroParams::kCount);
    for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] = i;
    }
    return v;
}

}  // namespace

Eigen::MatrixXd residual_jacobian(const AeroParams& params,
                                  const std::vector<SweepSample>& samples,
                                  const VehicleGeometry& geo,
                                  std::span<const WingSegment> segments,
                                  const ChannelWeights& weights, double relative_step,
                                  bool central) {
    FitOptions opt;
    opt.weights = weights;
    const Problem prob{samples, geo, segments, opt};
    const ParamVec p = params.to_vector();
    return prob.jacobian(p, prob.eval(p), all_slots(), relative_step, central);
}

std::vector<std::size_t> FitResult::identified_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t j : free_indices) {
        if (std::find(weak_indices.begin(), weak_indices.end(), j) == weak_indices.end()) {
            out.push_back(j);
        }
    }
    return out;
}

FitResult fit(const AeroParams& initial, const std::vector<SweepSample>& samples,
              const VehicleGeometry& geo, std::span<const WingSegment> segments,
              const FitOptions& opt) {
    initial.validate();
    if (samples.empty()) {
        throw std::invalid_argument("fit: no samples");
    }
    if (opt.slope_target && !(*opt.slope_target > 0.0)) {
        throw std::invalid_argument("fit: slope target must be positive");
    }
    if (opt.prior_weight < 0.0) {
        throw std::invalid_argument("fit: prior weight must be non-negative");
    }
    const Problem prob{samples, geo, segments, opt, initial.to_vector()};
    const auto& schema = AeroParams::schema();

    ParamVec x = initial.to_vector();
    Eigen::VectorXd r = prob.eval(x);
    double cost = 0.5 * r.squaredNorm();

    FitResult res;
    res.initial_cost = cost;
    res.cost_history.push_back(cost);

    // Identifiability: scaled Jacobian column norms at the starting point.
    {
        const Eigen::MatrixXd J0 = prob.jacobian(x, r, all_slots(), opt.fd_relative_step, false);
        Eigen::VectorXd norms(J0.cols());
        for (Eigen::Index j = 0; j < J0.cols(); ++j) {
            norms(j) = J0.col(j).norm() * param_scale(x[static_cast<std::size_t>(j)]);
        }
        const double ref = norms.maxCoeff();
        for (std::size_t j = 0; j < AeroParams::kCount; ++j) {
            if (norms(static_cast<Eigen::Index>(j)) <= opt.identifiability_tolerance * ref) {
                res.frozen_indices.push_back(j);
            } else {
                res.free_indices.push_back(j);
            }
        }
        if (!res.frozen_indices.empty()) {
            std::ostringstream w;
            w << "unidentifiable parameters frozen at their initial values:";
            for (std::size_t j : res.frozen_indices) {
                w << ' ' << schema[j].key;
            }
            res.warnings.push_back(w.str());
        }
    }
    const auto& free = res.free_indices;
    const auto nf = static_cast<Eigen::Index>(free.size());

    // Scale-free gradient: largest cosine between the residual and a
    // Jacobian column (zero exactly at a stationary point).
    auto scaled_gradient = [&](const Eigen::MatrixXd& J, const Eigen::VectorXd& rv) {
        Eigen::VectorXd g = J.transpose() * rv;
        const double rn = rv.norm();
        for (Eigen::Index c = 0; c < nf; ++c) {
            const double d = J.col(c).norm() * rn;
            g(c) = d > 0.0 ? g(c) / d : 0.0;
        }
        return g;
    };

    double lambda = opt.initial_lambda;
    Eigen::MatrixXd J;
    Eigen::VectorXd g;
    bool need_jacobian = true;
    res.stop_reason = "iteration limit";
    int it = 0;
    for (; nf > 0; ++it) {
        if (need_jacobian) {
            J = prob.jacobian(x, r, free, opt.fd_relative_step, false);
            g = scaled_gradient(J, r);
            need_jacobian = false;
        }
        res.gradient_norm = g.lpNorm<Eigen::Infinity>();
        if (res.gradient_norm < opt.gradient_tolerance) {
            res.stop_reason = "gradient tolerance";
            res.converged = true;
            break;
        }
        if (it >= opt.max_iterations) {
            break;
        }
        const Eigen::MatrixXd A = J.transpose() * J;
        const Eigen::VectorXd rhs = -(J.transpose() * r);
        Eigen::MatrixXd M = A;
        for (Eigen::Index c = 0; c < nf; ++c) {
            M(c, c) += lambda * std::max(A(c, c), 1e-12);
        }
        const Eigen::VectorXd delta = M.ldlt().solve(rhs);

        double xnorm = 0.0;
        for (std::size_t j : free) {
            xnorm += x[j] * x[j];
        }
        xnorm = std::sqrt(xnorm);
        if (delta.norm() < opt.step_tolerance * (xnorm + opt.step_tolerance)) {
            // As in MINPACK, a vanishing step counts as convergence.
            res.stop_reason = "step tolerance";
            res.converged = true;
            break;
        }

        ParamVec trial = x;
        for (Eigen::Index c = 0; c < nf; ++c) {
            trial[free[static_cast<std::size_t>(c)]] += delta(c);
        }
        bool accepted = false;
        if (evaluable(trial)) {
            const Eigen::VectorXd rt = prob.eval(trial);
            const double ct = 0.5 * rt.squaredNorm();
            if (std::isfinite(ct) && ct <= cost) {
                x = trial;
                r = rt;
                cost = ct;
                accepted = true;
            }
        }
        if (accepted) {
            lambda = std::max(lambda / 3.0, 1e-12);
            need_jacobian = true;
            res.cost_history.push_back(cost);
        } else {
            lambda *= 4.0;
            if (lambda > 1e14) {
                res.stop_reason = "damping overflow";
                break;
            }
        }
    }
    if (nf == 0) {
        res.stop_reason = "no identifiable parameters";
    }
    res.iterations = it;
    res.cost = cost;
    res.params = AeroParams::from_vector(x);

    // Per-channel RMS in measurement units.
    const std::size_t n = samples.size();
    for (int ch = 0; ch < 6; ++ch) {
        const double scale = ch < 3 ? opt.weights.force_scale : opt.weights.torque_scale;
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double e = r(static_cast<Eigen::Index>(6 * i + ch)) * scale;
            acc += e * e;
        }
        res.residual_rms[static_cast<std::size_t>(ch)] = std::sqrt(acc / static_cast<double>(n));
    }

    // Covariance from the Gauss-Newton Hessian at the solution.
    res.covariance = Eigen::MatrixXd::Zero(AeroParams::kCount, AeroParams::kCount);
    if (nf > 0) {
        const Eigen::MatrixXd Jf = prob.jacobian(x, r, free, opt.fd_relative_step, false);
        const Eigen::JacobiSVD<Eigen::MatrixXd> svd(Jf, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const Eigen::VectorXd sv = svd.singularValues();
        const double tol = sv(0) * 1e-10;
        Eigen::VectorXd inv2 = Eigen::VectorXd::Zero(sv.size());
        std::set<std::size_t> weak;
        for (Eigen::Index k = 0; k < sv.size(); ++k) {
            if (sv(k) > tol) {
                inv2(k) = 1.0 / (sv(k) * sv(k));
            } else {
                Eigen::Index imax = 0;
                svd.matrixV().col(k).cwiseAbs().maxCoeff(&imax);
                weak.insert(free[static_cast<std::size_t>(imax)]);
            }
        }
        if (!weak.empty()) {
            std::ostringstream w;
            w << "rank-deficient Jacobian; poorly identifiable:";
            for (std::size_t j : weak) {
                w << ' ' << schema[j].key;
            }
            res.warnings.push_back(w.str());
        }
        const double dof = std::max<double>(1.0, static_cast<double>(r.size() - nf));
        const double sigma2 = 2.0 * cost / dof;
        const Eigen::MatrixXd cov =
            sigma2 * svd.matrixV() * inv2.asDiagonal() * svd.matrixV().transpose();
        for (Eigen::Index a = 0; a < nf; ++a) {
            for (Eigen::Index b = 0; b < nf; ++b) {
                res.covariance(static_cast<Eigen::Index>(free[static_cast<std::size_t>(a)]),
                               static_cast<Eigen::Index>(free[static_cast<std::size_t>(b)])) =
                    cov(a, b);
            }
        }
    }
    for (std::size_t j : free) {
        const auto jj = static_cast<Eigen::Index>(j);
        if (std::sqrt(std::max(res.covariance(jj, jj), 0.0)) >
            opt.weak_relative_sd * param_scale(x[j])) {
            res.weak_indices.push_back(j);
        }
    }
    if (!res.weak_indices.empty()) {
        std::ostringstream w;
        w << "weakly identifiable (relative std-dev above " << opt.weak_relative_sd << "):";
        for (std::size_t j : res.weak_indices) {
            w << ' ' << schema[j].key;
        }
        res.warnings.push_back(w.str());
    }
    if (opt.slope_target) {
        res.calibrated_slope =
            differential_tilt_slope(res.params, geo, segments, opt.slope_condition);
    }
    return res;
}

std::array<double, 8> fit_thrust_ff(const std::vector<ThrustSample>& samples) {
    std::set<double> distinct;
    for (const auto& s : samples) {
        if (!std::isfinite(s.chi) || !std::isfinite(s.thrust)) {
            throw std::invalid_argument("fit_thrust_ff: non-finite sample");
        }
        distinct.insert(s.chi);
    }
    if (distinct.size() < 8) {
        throw std::invalid_argument("fit_thrust_ff: need at least 8 distinct chi values");
    }
    const auto n = static_cast<Eigen::Index>(samples.size());
    Eigen::MatrixXd V(n, 8);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double pw = 1.0;
        for (int k = 0; k < 8; ++k) {
            V(i, k) = pw;
            pw *= samples[static_cast<std::size_t>(i)].chi;
        }
        y(i) = samples[static_cast<std::size_t>(i)].thrust;
    }
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(V, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd sv = svd.singularValues();
    const double cond = sv(0) / sv(sv.size() - 1);
    if (!(cond < 1e12)) {
        std::ostringstream msg;
        msg << "fit_thrust_ff: Vandermonde condition number " << cond
            << " too large; rescale chi to an O(1) range";
        throw std::runtime_error(msg.str());
    }
    const Eigen::VectorXd c = svd.solve(y);
    std::array<double, 8> out{};
    for (int k = 0; k < 8; ++k) {
        out[static_cast<std::size_t>(k)] = c(k);
    }
    const double lo = *distinct.begin();
    const double hi = *distinct.rbegin();
    for (int i = 0; i <= 200; ++i) {
        const double chi = lo + (hi - lo) * i / 200.0;
        double acc = 0.0;
        for (auto it = out.rbegin(); it != out.rend(); ++it) {
            acc = acc * chi + *it;
        }
        if (!(acc > 0.0)) {
            throw std::runtime_error("fit_thrust_ff: fitted polynomial is not positive on the chi range");
        }
    }
    return out;
}

namespace {

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        v[static_cast<std::size_t>(i)] = n == 1 ? a : a + (b - a) * i / (n - 1);
    }
    return v;
}

}  // namespace

std::vector<SweepSample> generate_synthetic_sweep(const AeroParams& params,
                                                  const SweepGrid& g, const NoiseSpec& noise,
                                                  std::uint64_t seed,
                                                  const VehicleGeometry& geo,
                                                  std::span<const WingSegment> segments) {
    if (g.speed_count < 1 || g.angle_count < 1 || g.chi_count < 1 || g.epsilon_count < 1) {
        throw std::invalid_argument("sweep grid counts must be positive");
    }
    if (g.angle_jitter < 0.0 || g.angle_jitter > 1.0) {
        throw std::invalid_argument("sweep angle jitter must lie in [0, 1]");
    }
    if (g.speed_min < 0.0 || g.speed_max < g.speed_min) {
        throw std::invalid_argument("sweep flow speeds must be non-negative and ordered");
    }
    if (g.main_thrust_min < 0.0 || g.main_thrust_max < g.main_thrust_min ||
        g.tail_thrust_max < 0.0) {
        throw std::invalid_argument("sweep thrust ranges are invalid");
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    std::vector<SweepSample> out;
    out.reserve(static_cast<std::size_t>(g.speed_count) * g.angle_count * g.chi_count *
                g.epsilon_count);
    const double spacing =
        g.angle_count > 1 ? (g.angle_max - g.angle_min) / (g.angle_count - 1) : 0.0;
    for (double v : linspace(g.speed_min, g.speed_max, g.speed_count)) {
        for (double a : linspace(g.angle_min, g.angle_max, g.angle_count)) {
            for (double chi : linspace(g.chi_min, g.chi_max, g.chi_count)) {
                for (double eps : linspace(g.epsilon_min, g.epsilon_max, g.epsilon_count)) {
                    SweepSample s;
                    s.flow_speed = v;
                    const double jitter = (u01(rng) - 0.5) * g.angle_jitter * spacing;
                    s.flow_angle = std::clamp(a + jitter, g.angle_min, g.angle_max);
                    s.chi = chi;
                    s.epsilon = eps;
                    const double span = g.main_thrust_max - g.main_thrust_min;
                    s.T_r = g.main_thrust_min + span * u01(rng);
                    s.T_l = g.main_thrust_min + span * u01(rng);
                    s.T_t = g.tail_thrust_max * (2.0 * u01(rng) - 1.0);
                    const Wrench w = predict_sample(params, s, geo, segments);
                    s.force = w.force;
                    s.torque = w.torque;
                    // Noise draws happen unconditionally so the thrust stream
                    // does not depend on the noise level.
                    for (int k = 0; k < 3; ++k) {
                        const double n1 = gauss(rng);
                        const double n2 = gauss(rng);
                        const double n3 = gauss(rng);
                        const double n4 = gauss(rng);
                        s.force(k) += noise.relative * std::abs(w.force(k)) * n1 +
                                      noise.absolute_force * n2;
                        s.torque(k) += noise.relative * std::abs(w.torque(k)) * n3 +
                                       noise.absolute_torque * n4;
                    }
                    out.push_back(s);
                }
            }
        }
    }
    return out;
}

namespace {

std::vector<double> parse_row(const std::string& line, std::size_t expected, std::size_t lineno) {
    std::vector<double> vals;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        std::size_t pos = 0;
        double v = 0.0;
        try {
            v = std::stod(cell, &pos);
        } catch (const std::exception&) {
            throw std::runtime_error("line " + std::to_string(lineno) + ": bad number '" + cell + "'");
        }
        vals.push_back(v);
    }
    if (vals.size() != expected) {
        throw std::runtime_error("line " + std::to_string(lineno) + ": expected " +
                                 std::to_string(expected) + " columns");
    }
    return vals;
}

std::string strip(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    const auto b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
}

constexpr const char* kSweepHeader =
    "flow_speed,flow_angle,chi,epsilon,T_r,T_l,T_t,F_x,F_y,F_z,tau_x,tau_y,tau_z";

}  // namespace

void write_sweep_csv(std::ostream& out, const std::vector<SweepSample>& samples) {
    out << kSweepHeader << '\n';
    out << std::setprecision(17);
    for (const auto& s : samples) {
        out << s.flow_speed << ',' << s.flow_angle << ',' << s.chi << ',' << s.epsilon << ','
            << s.T_r << ',' << s.T_l << ',' << s.T_t << ',' << s.force.x() << ','
            << s.force.y() << ',' << s.force.z() << ',' << s.torque.x() << ','
            << s.torque.y() << ',' << s.torque.z() << '\n';
    }
}

std::vector<SweepSample> read_sweep_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || strip(line) != kSweepHeader) {
        throw std::runtime_error(std::string("sweep csv: expected header ") + kSweepHeader);
    }
    std::vector<SweepSample> out;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (strip(line).empty()) {
            continue;
        }
        const auto v = parse_row(line, 13, lineno);
        SweepSample s;
        s.flow_speed = v[0];
        s.flow_angle = v[1];
        s.chi = v[2];
        s.epsilon = v[3];
        s.T_r = v[4];
        s.T_l = v[5];
        s.T_t = v[6];
        s.force = Vec3(v[7], v[8], v[9]);
        s.torque = Vec3(v[10], v[11], v[12]);
        if (s.flow_speed < 0.0) {
            throw std::runtime_error("line " + std::to_string(lineno) + ": negative flow speed");
        }
        out.push_back(s);
    }
    return out;
}

void write_thrust_csv(std::ostream& out, const std::vector<ThrustSample>& samples) {
    out << "chi,thrust\n" << std::setprecision(17);
    for (const auto& s : samples) {
        out << s.chi << ',' << s.thrust << '\n';
    }
}

std::vector<ThrustSample> read_thrust_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || strip(line) != "chi,thrust") {
        throw std::runtime_error("thrust csv: expected header chi,thrust");
    }
    std::vector<ThrustSample> out;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (strip(line).empty()) {
            continue;
        }
        const auto v = parse_row(line, 2, lineno);
        out.push_back({v[0], v[1]});
    }
    return out;
}

}  // namespace tiltwing
