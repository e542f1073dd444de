#include "volnet/trainers.hpp"

#include "volnet/error.hpp"
#include "volnet/text.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace volnet::train {

using Eigen::MatrixXd;
using Eigen::VectorXd;

std::string_view to_string(Algorithm algorithm)
{
    switch (algorithm) {
    case Algorithm::LM: return "LM";
    case Algorithm::BFGS: return "BFGS";
    case Algorithm::RPROP: return "RPROP";
    case Algorithm::SCG: return "SCG";
    case Algorithm::CG_FLETCHER_REEVES: return "CG_FLETCHER_REEVES";
    case Algorithm::CG_POLAK_RIBIERE: return "CG_POLAK_RIBIERE";
    case Algorithm::CG_POWELL_BEALE: return "CG_POWELL_BEALE";
    case Algorithm::OSS: return "OSS";
    case Algorithm::GDX: return "GDX";
    }
    return "?";
}

std::optional<Algorithm> algorithm_from_string(std::string_view name)
{
    for (auto a : kAllAlgorithms) {
        if (to_string(a) == name) return a;
    }
    return std::nullopt;
}

std::string_view to_string(StopReason reason)
{
    switch (reason) {
    case StopReason::MaxEpochs: return "MaxEpochs";
    case StopReason::GoalMet: return "GoalMet";
    case StopReason::GradientFloor: return "GradientFloor";
    case StopReason::EarlyStop: return "EarlyStop";
    case StopReason::LineSearchFail: return "LineSearchFail";
    }
    return "?";
}

std::optional<StopReason> stop_reason_from_string(std::string_view name)
{
    for (auto r : {StopReason::MaxEpochs, StopReason::GoalMet, StopReason::GradientFloor, StopReason::EarlyStop,
                   StopReason::LineSearchFail}) {
        if (to_string(r) == name) return r;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// TrainerSpec

TrainerSpec TrainerSpec::defaults(Algorithm algorithm)
{
    TrainerSpec spec;
    spec.algorithm_ = algorithm;
    auto& h = spec.hyper_;
    auto line_search = [&h] {
        h["ls_c1"] = 1e-4;
        h["ls_c2"] = 0.5;
        h["ls_max_evals"] = 25;
    };
    switch (algorithm) {
    case Algorithm::LM:
        h["mu"] = 1e-3;
        h["mu_dec"] = 0.1;
        h["mu_inc"] = 10.0;
        h["mu_max"] = 1e10;
        break;
    case Algorithm::GDX:
        h["lr"] = 0.01;
        h["lr_inc"] = 1.05;
        h["lr_dec"] = 0.7;
        h["momentum"] = 0.9;
        break;
    case Algorithm::RPROP:
        h["delta0"] = 0.07;
        h["delta_inc"] = 1.2;
        h["delta_dec"] = 0.5;
        h["delta_min"] = 1e-6;
        h["delta_max"] = 50.0;
        break;
    case Algorithm::SCG:
        h["sigma"] = 1e-4;
        h["lambda"] = 1e-6;
        break;
    case Algorithm::BFGS:
    case Algorithm::CG_FLETCHER_REEVES:
    case Algorithm::CG_POLAK_RIBIERE:
    case Algorithm::CG_POWELL_BEALE:
    case Algorithm::OSS:
        line_search();
        break;
    }
    return spec;
}

double TrainerSpec::get(std::string_view name) const
{
    auto it = hyper_.find(name);
    if (it == hyper_.end()) {
        throw Error(ErrorKind::InvalidArgument,
                    std::string(to_string(algorithm_)) + " has no hyperparameter '" + std::string(name) + "'");
    }
    return it->second;
}

void TrainerSpec::set(std::string_view name, double value)
{
    auto it = hyper_.find(name);
    if (it == hyper_.end()) {
        throw Error(ErrorKind::InvalidArgument,
                    std::string(to_string(algorithm_)) + " has no hyperparameter '" + std::string(name) + "'");
    }
    const bool ok = name == "momentum" ? (value >= 0.0 && value < 1.0) : (std::isfinite(value) && value > 0.0);
    if (!ok) {
        throw Error(ErrorKind::InvalidArgument,
                    "hyperparameter " + std::string(name) + " out of range: " + text::format_exact(value));
    }
    it->second = value;
}

void TrainConfig::validate() const
{
    if (max_epochs < 1) throw Error(ErrorKind::InvalidArgument, "max_epochs must be at least 1");
    if (!(goal >= 0.0)) throw Error(ErrorKind::InvalidArgument, "goal must be non-negative");
    if (!(min_grad >= 0.0)) throw Error(ErrorKind::InvalidArgument, "min_grad must be non-negative");
}

void write_curve_csv(std::ostream& out, const TrainRecord& record)
{
    out << "epoch,train_loss,validation_loss\n";
    for (std::size_t i = 0; i < record.train_loss_curve.size(); ++i) {
        out << (i + 1) << ',' << text::format_exact(record.train_loss_curve[i]) << ',';
        if (i < record.validation_loss_curve.size()) out << text::format_exact(record.validation_loss_curve[i]);
        out << '\n';
    }
}

namespace {

bool all_finite(const VectorXd& v) { return v.allFinite(); }

LineSearchParams line_search_params(const TrainerSpec& spec)
{
    LineSearchParams p;
    p.c1 = spec.get("ls_c1");
    p.c2 = spec.get("ls_c2");
    p.max_evaluations = static_cast<int>(spec.get("ls_max_evals"));
    if (!(p.c1 < p.c2 && p.c2 < 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "line search needs 0 < c1 < c2 < 1");
    }
    return p;
}

struct LineStep {
    double alpha;
    double value;
    VectorXd grad;
};

/// Strong-Wolfe step along d from state; nullopt when d is not a descent direction or
/// the search fails.
std::optional<LineStep> search_along(const Objective& objective, const OptimizerState& state, const VectorXd& d,
                                     double alpha0, const LineSearchParams& params)
{
    const double slope0 = state.grad.dot(d);
    if (!(slope0 < 0.0)) return std::nullopt;

    VectorXd trial;
    VectorXd trial_grad;
    double last_alpha = std::numeric_limits<double>::quiet_NaN();
    auto phi = [&](double alpha) {
        trial = state.w + alpha * d;
        const double f = objective.value_and_gradient(trial, trial_grad);
        last_alpha = alpha;
        return LinePoint{f, trial_grad.dot(d)};
    };
    const auto res = strong_wolfe_search(phi, state.loss, slope0, alpha0, params);
    if (!res.converged) return std::nullopt;
    if (last_alpha != res.alpha) {
        trial = state.w + res.alpha * d;
        objective.value_and_gradient(trial, trial_grad);
    }
    return LineStep{res.alpha, res.value, trial_grad};
}

void apply_step(OptimizerState& state, const VectorXd& d, const LineStep& step)
{
    state.w += step.alpha * d;
    state.loss = step.value;
    state.grad = step.grad;
}

double initial_alpha(const VectorXd& g)
{
    const double n = g.norm();
    return n > 0.0 ? std::min(1.0, 1.0 / n) : 1.0;
}

}  // namespace

// ---------------------------------------------------------------------------
// GDX

GradientDescentAdaptive::GradientDescentAdaptive(const TrainerSpec& spec)
    : lr_(spec.get("lr")), lr_inc_(spec.get("lr_inc")), lr_dec_(spec.get("lr_dec")),
      momentum_(spec.get("momentum"))
{
}

StepOutcome GradientDescentAdaptive::step(const Objective& objective, OptimizerState& state)
{
    if (last_update_.size() != state.w.size()) last_update_ = VectorXd::Zero(state.w.size());
    const VectorXd update = momentum_ * last_update_ - lr_ * state.grad;
    const VectorXd w_new = state.w + update;
    VectorXd g_new;
    const double f_new = objective.value_and_gradient(w_new, g_new);

    if (!std::isfinite(f_new) || f_new > state.loss) {
        lr_ *= lr_dec_;
        last_update_.setZero();
        return StepOutcome::Rejected;
    }
    if (f_new < state.loss) lr_ *= lr_inc_;
    state.w = w_new;
    state.loss = f_new;
    state.grad = g_new;
    last_update_ = update;
    return StepOutcome::Accepted;
}

// ---------------------------------------------------------------------------
// RPROP

Rprop::Rprop(const TrainerSpec& spec)
    : delta0_(spec.get("delta0")), inc_(spec.get("delta_inc")), dec_(spec.get("delta_dec")),
      delta_min_(spec.get("delta_min")), delta_max_(spec.get("delta_max"))
{
}

StepOutcome Rprop::step(const Objective& objective, OptimizerState& state)
{
    const auto n = state.w.size();
    if (delta_.size() != n) {
        delta_ = VectorXd::Constant(n, delta0_);
        prev_grad_ = VectorXd::Zero(n);
    }
    VectorXd g = state.grad;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double agreement = g(i) * prev_grad_(i);
        if (agreement > 0.0) {
            delta_(i) = std::min(delta_(i) * inc_, delta_max_);
        } else if (agreement < 0.0) {
            delta_(i) = std::max(delta_(i) * dec_, delta_min_);
            g(i) = 0.0;
        }
        if (g(i) > 0.0) {
            state.w(i) -= delta_(i);
        } else if (g(i) < 0.0) {
            state.w(i) += delta_(i);
        }
    }
    prev_grad_ = g;
    state.loss = objective.value_and_gradient(state.w, state.grad);
    return StepOutcome::Accepted;
}

// ---------------------------------------------------------------------------
// Conjugate gradient

double conjugate_beta(BetaRule rule, const VectorXd& g, const VectorXd& g_prev)
{
    const double denom = g_prev.squaredNorm();
    if (denom == 0.0) return 0.0;
    if (rule == BetaRule::FletcherReeves) return g.squaredNorm() / denom;
    return std::max(0.0, g.dot(g - g_prev) / denom);
}

ConjugateGradient::ConjugateGradient(const TrainerSpec& spec, BetaRule rule)
    : rule_(rule), ls_(line_search_params(spec))
{
}

StepOutcome ConjugateGradient::step(const Objective& objective, OptimizerState& state)
{
    const auto& g = state.grad;
    const auto n = static_cast<std::size_t>(state.w.size());
    VectorXd d = -g;
    bool steepest = true;
    if (d_prev_.size() == g.size() && since_restart_ > 0 && since_restart_ < n) {
        const double gg = g.squaredNorm();
        const bool beale_restart = rule_ == BetaRule::PowellBeale && std::abs(g.dot(g_prev_)) >= 0.2 * gg;
        if (!beale_restart) {
            const VectorXd candidate = -g + conjugate_beta(rule_, g, g_prev_) * d_prev_;
            if (candidate.dot(g) < 0.0) {
                d = candidate;
                steepest = false;
            }
        }
    }
    if (steepest) since_restart_ = 0;

    const double slope = g.dot(d);
    if (!(slope < 0.0)) return StepOutcome::Rejected;  // zero gradient
    double alpha0 = alpha_prev_ > 0.0 ? alpha_prev_ * slope_prev_ / slope : initial_alpha(g);
    if (!(alpha0 > 0.0) || !std::isfinite(alpha0)) alpha0 = initial_alpha(g);

    auto step = search_along(objective, state, d, alpha0, ls_);
    if (!step && !steepest) {
        d = -g;
        since_restart_ = 0;
        step = search_along(objective, state, d, initial_alpha(g), ls_);
    }
    if (!step) return StepOutcome::LineSearchFailed;

    g_prev_ = g;
    d_prev_ = d;
    alpha_prev_ = step->alpha;
    slope_prev_ = g_prev_.dot(d);
    apply_step(state, d, *step);
    ++since_restart_;
    return StepOutcome::Accepted;
}

// ---------------------------------------------------------------------------
// SCG

ScaledConjugateGradient::ScaledConjugateGradient(const TrainerSpec& spec)
    : sigma0_(spec.get("sigma")), lambda_(spec.get("lambda"))
{
}

StepOutcome ScaledConjugateGradient::step(const Objective& objective, OptimizerState& state)
{
    const VectorXd r = -state.grad;
    if (!started_ || p_.size() != r.size()) {
        p_ = r;
        started_ = true;
        success_ = true;
        lambda_bar_ = 0.0;
        iteration_ = 0;
    }
    double mu = p_.dot(r);
    if (!(mu > 0.0)) {
        // Lost conjugacy; restart along steepest descent.
        p_ = r;
        success_ = true;
        lambda_bar_ = 0.0;
        mu = p_.dot(r);
        if (!(mu > 0.0)) return StepOutcome::Rejected;
    }
    const double p2 = p_.squaredNorm();

    if (success_) {
        const double sigma = sigma0_ / std::sqrt(p2);
        VectorXd g_sigma;
        objective.value_and_gradient(state.w + sigma * p_, g_sigma);
        const VectorXd s = (g_sigma - state.grad) / sigma;
        delta_ = p_.dot(s);
    }
    delta_ += (lambda_ - lambda_bar_) * p2;
    if (delta_ <= 0.0) {
        lambda_bar_ = 2.0 * (lambda_ - delta_ / p2);
        delta_ = -delta_ + lambda_ * p2;
        lambda_ = lambda_bar_;
    }
    const double alpha = mu / delta_;
    const VectorXd w_new = state.w + alpha * p_;
    VectorXd g_new;
    const double f_new = objective.value_and_gradient(w_new, g_new);
    const double comparison = std::isfinite(f_new) ? 2.0 * delta_ * (state.loss - f_new) / (mu * mu)
                                                   : -std::numeric_limits<double>::infinity();

    StepOutcome outcome = StepOutcome::Rejected;
    if (comparison > 0.0) {
        ++iteration_;
        const VectorXd r_new = -g_new;
        state.w = w_new;
        state.loss = f_new;
        state.grad = g_new;
        lambda_bar_ = 0.0;
        success_ = true;
        if (iteration_ % static_cast<std::size_t>(p_.size()) == 0) {
            p_ = r_new;
        } else {
            const double beta = (r_new.squaredNorm() - r_new.dot(r)) / mu;
            p_ = r_new + beta * p_;
        }
        if (comparison > 0.75) lambda_ *= 0.5;
        outcome = StepOutcome::Accepted;
    } else {
        lambda_bar_ = lambda_;
        success_ = false;
    }
    if (comparison < 0.25) lambda_ *= 2.0;
    lambda_ = std::clamp(lambda_, 1e-15, 1e100);
    return outcome;
}

// ---------------------------------------------------------------------------
// OSS

OneStepSecant::OneStepSecant(const TrainerSpec& spec) : ls_(line_search_params(spec)) {}

VectorXd OneStepSecant::direction(const VectorXd& g, const VectorXd& s, const VectorXd& y)
{
    const double sy = s.dot(y);
    if (!(sy > 1e-12)) return -g;
    const double sg = s.dot(g);
    const double yg = y.dot(g);
    const double yy = y.dot(y);
    const double b = sg / sy;
    const double a = -(1.0 + yy / sy) * b + yg / sy;
    VectorXd d = -g + a * s + b * y;
    if (!(d.dot(g) < 0.0) || !d.allFinite()) return -g;
    return d;
}

StepOutcome OneStepSecant::step(const Objective& objective, OptimizerState& state)
{
    const VectorXd& g = state.grad;
    VectorXd d = has_pair_ ? direction(g, s_, y_) : VectorXd(-g);
    const bool steepest = !has_pair_ || d.isApprox(-g, 0.0);
    auto step = search_along(objective, state, d, has_pair_ ? 1.0 : initial_alpha(g), ls_);
    if (!step && !steepest) {
        d = -g;
        step = search_along(objective, state, d, initial_alpha(g), ls_);
    }
    if (!step) return StepOutcome::LineSearchFailed;
    s_ = step->alpha * d;
    y_ = step->grad - g;
    has_pair_ = true;
    apply_step(state, d, *step);
    return StepOutcome::Accepted;
}

// ---------------------------------------------------------------------------
// BFGS

Bfgs::Bfgs(const TrainerSpec& spec) : ls_(line_search_params(spec)) {}

bool Bfgs::update_inverse_hessian(MatrixXd& H, const VectorXd& s, const VectorXd& y)
{
    const double sy = s.dot(y);
    if (!(sy > 1e-10)) return false;
    const double rho = 1.0 / sy;
    const VectorXd Hy = H * y;
    const double yHy = y.dot(Hy);
    // H+ = H - rho (Hy s' + s y'H) + (rho^2 y'Hy + rho) s s'
    H.noalias() -= rho * (Hy * s.transpose() + s * Hy.transpose());
    H.noalias() += (rho * rho * yHy + rho) * (s * s.transpose());
    return true;
}

StepOutcome Bfgs::step(const Objective& objective, OptimizerState& state)
{
    const auto n = state.w.size();
    if (H_.rows() != n) H_ = MatrixXd::Identity(n, n);
    const VectorXd g = state.grad;

    VectorXd d = -(H_ * g);
    bool steepest = false;
    if (!(d.dot(g) < 0.0) || !d.allFinite()) {
        H_.setIdentity();
        d = -g;
        steepest = true;
    }
    auto step = search_along(objective, state, d, first_ ? initial_alpha(g) : 1.0, ls_);
    if (!step && !steepest) {
        H_.setIdentity();
        d = -g;
        step = search_along(objective, state, d, initial_alpha(g), ls_);
    }
    if (!step) return StepOutcome::LineSearchFailed;
    first_ = false;
    const VectorXd s = step->alpha * d;
    const VectorXd y = step->grad - g;
    update_inverse_hessian(H_, s, y);
    apply_step(state, d, *step);
    return StepOutcome::Accepted;
}

// ---------------------------------------------------------------------------
// LM

LevenbergMarquardt::LevenbergMarquardt(const TrainerSpec& spec)
    : mu_(spec.get("mu")), mu_dec_(spec.get("mu_dec")), mu_inc_(spec.get("mu_inc")), mu_max_(spec.get("mu_max"))
{
}

StepOutcome LevenbergMarquardt::try_step(const Objective& objective, OptimizerState& state)
{
    if (!objective.has_residuals()) {
        throw Error(ErrorKind::InvalidArgument, "Levenberg-Marquardt needs a residual objective");
    }
    if (!cache_valid_) {
        VectorXd r;
        MatrixXd J;
        objective.residuals(state.w, r, J);
        jtj_.noalias() = J.transpose() * J;
        jtr_.noalias() = J.transpose() * r;
        cache_valid_ = true;
    }
    MatrixXd A = jtj_;
    A.diagonal().array() += mu_;
    const VectorXd delta = A.ldlt().solve(jtr_);

    bool accepted = false;
    VectorXd w_new;
    VectorXd g_new;
    double f_new = 0.0;
    if (delta.allFinite()) {
        w_new = state.w - delta;
        f_new = objective.value_and_gradient(w_new, g_new);
        accepted = std::isfinite(f_new) && f_new < state.loss;
    }
    if (accepted) {
        state.w = std::move(w_new);
        state.loss = f_new;
        state.grad = std::move(g_new);
        mu_ = std::max(mu_ * mu_dec_, 1e-20);
        cache_valid_ = false;
        ++accepted_;
        return StepOutcome::Accepted;
    }
    mu_ *= mu_inc_;
    if (mu_ > mu_max_) {
        throw Error(ErrorKind::NumericalDivergence,
                    "Levenberg-Marquardt damping exceeded " + text::format_exact(mu_max_));
    }
    return StepOutcome::Rejected;
}

StepOutcome LevenbergMarquardt::step(const Objective& objective, OptimizerState& state)
{
    // The mu ceiling bounds this loop.
    while (try_step(objective, state) != StepOutcome::Accepted) {
    }
    return StepOutcome::Accepted;
}

std::unique_ptr<Optimizer> make_optimizer(const TrainerSpec& spec)
{
    switch (spec.algorithm()) {
    case Algorithm::LM: return std::make_unique<LevenbergMarquardt>(spec);
    case Algorithm::BFGS: return std::make_unique<Bfgs>(spec);
    case Algorithm::RPROP: return std::make_unique<Rprop>(spec);
    case Algorithm::SCG: return std::make_unique<ScaledConjugateGradient>(spec);
    case Algorithm::CG_FLETCHER_REEVES: return std::make_unique<ConjugateGradient>(spec, BetaRule::FletcherReeves);
    case Algorithm::CG_POLAK_RIBIERE: return std::make_unique<ConjugateGradient>(spec, BetaRule::PolakRibiere);
    case Algorithm::CG_POWELL_BEALE: return std::make_unique<ConjugateGradient>(spec, BetaRule::PowellBeale);
    case Algorithm::OSS: return std::make_unique<OneStepSecant>(spec);
    case Algorithm::GDX: return std::make_unique<GradientDescentAdaptive>(spec);
    }
    throw Error(ErrorKind::InvalidArgument, "unknown algorithm");
}

// ---------------------------------------------------------------------------
// Epoch loop

TrainRecord minimize(const Objective& train_objective, const Objective* validation_objective, Optimizer& optimizer,
                     const VectorXd& initial, const TrainConfig& config)
{
    config.validate();
    if (initial.size() != train_objective.dimension()) {
        throw Error(ErrorKind::DimensionMismatch, "initial parameters do not match the objective");
    }

    OptimizerState state;
    state.w = initial;
    state.loss = train_objective.value_and_gradient(state.w, state.grad);
    if (!std::isfinite(state.loss) || !all_finite(state.grad)) {
        throw Error(ErrorKind::NumericalDivergence, "initial loss is not finite");
    }

    TrainRecord record;
    record.best_params = initial;
    double best_val = std::numeric_limits<double>::infinity();
    double prev_val = validation_objective ? validation_objective->value(initial)
                                           : std::numeric_limits<double>::quiet_NaN();
    std::size_t increases = 0;

    auto finish = [&](StopReason reason) {
        record.stop_reason = reason;
        if (!validation_objective) {
            record.best_params = state.w;
            record.best_epoch = record.epochs_run;
        }
        return record;
    };

    if (state.loss <= config.goal) return finish(StopReason::GoalMet);
    if (state.grad.norm() < config.min_grad) return finish(StopReason::GradientFloor);

    for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
        const StepOutcome outcome = optimizer.step(train_objective, state);
        if (!std::isfinite(state.loss) || !all_finite(state.w) || !all_finite(state.grad)) {
            throw Error(ErrorKind::NumericalDivergence,
                        "training diverged at epoch " + std::to_string(epoch));
        }
        record.epochs_run = epoch;
        record.train_loss_curve.push_back(state.loss);

        if (validation_objective) {
            const double v = validation_objective->value(state.w);
            if (!std::isfinite(v)) {
                throw Error(ErrorKind::NumericalDivergence, "validation loss diverged at epoch " + std::to_string(epoch));
            }
            record.validation_loss_curve.push_back(v);
            if (v < best_val) {
                best_val = v;
                record.best_params = state.w;
                record.best_epoch = epoch;
            }
            increases = v > prev_val ? increases + 1 : 0;
            prev_val = v;
        }

        if (outcome == StepOutcome::LineSearchFailed) return finish(StopReason::LineSearchFail);
        if (state.loss <= config.goal) return finish(StopReason::GoalMet);
        if (validation_objective && config.patience > 0 && increases >= config.patience) {
            return finish(StopReason::EarlyStop);
        }
        if (state.grad.norm() < config.min_grad) return finish(StopReason::GradientFloor);
    }
    return finish(StopReason::MaxEpochs);
}

TrainOutcome train(const nn::Network& network, const TrainerSpec& spec, const TrainConfig& config,
                   const features::FeatureDataset& train_set, const features::FeatureDataset& validation_set)
{
    if (train_set.rows() == 0) throw Error(ErrorKind::EmptyTrain, "training set is empty");
    const NetworkObjective train_objective(network.topology, train_set.X, train_set.Y);
    std::optional<NetworkObjective> validation_objective;
    if (validation_set.rows() > 0) {
        validation_objective.emplace(network.topology, validation_set.X, validation_set.Y);
    }
    auto optimizer = make_optimizer(spec);
    TrainRecord record = minimize(train_objective, validation_objective ? &*validation_objective : nullptr,
                                  *optimizer, network.flatten(), config);
    nn::Network trained = nn::Network::from_params(network.topology, record.best_params);
    trained.seed = network.seed;
    return {std::move(trained), std::move(record)};
}

}  // namespace volnet::train
