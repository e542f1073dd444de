/**
 * @file trainers.hpp
 * @brief Nine full-batch backprop-family training algorithms and the shared stopping
 * protocol.
 *
 * Every algorithm is an Optimizer that advances an OptimizerState by one epoch against an
 * Objective. `minimize` owns the epoch loop (goal, gradient floor, validation early
 * stopping, max epochs); `train` wires a network and scaled data sets into it.
 */
#pragma once

#include "volnet/features.hpp"
#include "volnet/line_search.hpp"
#include "volnet/network.hpp"
#include "volnet/objective.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace volnet::train {

enum class Algorithm {
    LM,
    BFGS,
    RPROP,
    SCG,
    CG_FLETCHER_REEVES,
    CG_POLAK_RIBIERE,
    CG_POWELL_BEALE,
    OSS,
    GDX,
};

inline constexpr std::array<Algorithm, 9> kAllAlgorithms = {
    Algorithm::LM,  Algorithm::BFGS, Algorithm::RPROP, Algorithm::SCG, Algorithm::CG_FLETCHER_REEVES,
    Algorithm::CG_POLAK_RIBIERE, Algorithm::CG_POWELL_BEALE, Algorithm::OSS, Algorithm::GDX,
};

std::string_view to_string(Algorithm algorithm);
std::optional<Algorithm> algorithm_from_string(std::string_view name);

/// An algorithm tag plus its named hyperparameters. Only names present in the defaults
/// are accepted by set().
class TrainerSpec {
public:
    static TrainerSpec defaults(Algorithm algorithm);

    Algorithm algorithm() const { return algorithm_; }
    double get(std::string_view name) const;
    void set(std::string_view name, double value);
    const std::map<std::string, double, std::less<>>& hyperparameters() const { return hyper_; }

private:
    Algorithm algorithm_ = Algorithm::LM;
    std::map<std::string, double, std::less<>> hyper_;
};

struct TrainConfig {
    std::size_t max_epochs = 1000;
    double goal = 1e-5;
    /// Consecutive validation-loss increases tolerated; 0 disables early stopping.
    std::size_t patience = 6;
    double min_grad = 1e-7;
    std::uint64_t seed = 0;

    void validate() const;
};

enum class StopReason { MaxEpochs, GoalMet, GradientFloor, EarlyStop, LineSearchFail };

std::string_view to_string(StopReason reason);
std::optional<StopReason> stop_reason_from_string(std::string_view name);

struct TrainRecord {
    std::size_t epochs_run = 0;
    StopReason stop_reason = StopReason::MaxEpochs;
    std::vector<double> train_loss_curve;
    std::vector<double> validation_loss_curve;
    Eigen::VectorXd best_params;
    /// Epoch (1-based) whose parameters are best_params; 0 means the initial point.
    std::size_t best_epoch = 0;
};

/// `epoch,train_loss,validation_loss`; the validation column is empty without validation data.
void write_curve_csv(std::ostream& out, const TrainRecord& record);

struct OptimizerState {
    Eigen::VectorXd w;
    double loss = 0.0;
    Eigen::VectorXd grad;
};

enum class StepOutcome { Accepted, Rejected, LineSearchFailed };

class Optimizer {
public:
    virtual ~Optimizer() = default;
    /// Advances one epoch. On return `state` holds the (possibly unchanged) iterate with
    /// its loss and gradient.
    virtual StepOutcome step(const Objective& objective, OptimizerState& state) = 0;
};

/// Gradient descent with momentum and an adaptive learning rate.
class GradientDescentAdaptive final : public Optimizer {
public:
    explicit GradientDescentAdaptive(const TrainerSpec& spec);
    StepOutcome step(const Objective& objective, OptimizerState& state) override;
    double learning_rate() const { return lr_; }

private:
    double lr_;
    double lr_inc_;
    double lr_dec_;
    double momentum_;
    Eigen::VectorXd last_update_;
};

/// iRPROP-: sign-based per-weight steps, no weight backtracking.
class Rprop final : public Optimizer {
public:
    explicit Rprop(const TrainerSpec& spec);
    StepOutcome step(const Objective& objective, OptimizerState& state) override;
    const Eigen::VectorXd& step_sizes() const { return delta_; }

private:
    double delta0_;
    double inc_;
    double dec_;
    double delta_min_;
    double delta_max_;
    Eigen::VectorXd delta_;
    Eigen::VectorXd prev_grad_;
};

enum class BetaRule { FletcherReeves, PolakRibiere, PowellBeale };

/// FR: g'g / g_prev'g_prev. PR and Powell-Beale: max(0, g'(g - g_prev) / g_prev'g_prev).
double conjugate_beta(BetaRule rule, const Eigen::VectorXd& g, const Eigen::VectorXd& g_prev);

class ConjugateGradient final : public Optimizer {
public:
    ConjugateGradient(const TrainerSpec& spec, BetaRule rule);
    StepOutcome step(const Objective& objective, OptimizerState& state) override;
    const Eigen::VectorXd& direction() const { return d_prev_; }

private:
    BetaRule rule_;
    LineSearchParams ls_;
    std::size_t since_restart_ = 0;
    double alpha_prev_ = 0.0;
    double slope_prev_ = 0.0;
    Eigen::VectorXd g_prev_;
    Eigen::VectorXd d_prev_;
};

/// Moller's scaled conjugate gradient: no line search, curvature from a finite difference
/// of gradients along the search direction, Levenberg-style scale lambda.
class ScaledConjugateGradient final : public Optimizer {
public:
    explicit ScaledConjugateGradient(const TrainerSpec& spec);
    StepOutcome step(const Objective& objective, OptimizerState& state) override;
    double lambda() const { return lambda_; }

private:
    double sigma0_;
    double lambda_;
    double lambda_bar_ = 0.0;
    double delta_ = 0.0;
    bool success_ = true;
    bool started_ = false;
    std::size_t iteration_ = 0;
    Eigen::VectorXd p_;
};

/// One-step secant: memoryless BFGS built from the latest (s, y) pair.
class OneStepSecant final : public Optimizer {
public:
    explicit OneStepSecant(const TrainerSpec& spec);
    StepOutcome step(const Objective& objective, OptimizerState& state) override;

    /// -g + A s + B y; falls back to -g when s'y <= 1e-12 or the result is not a descent
    /// direction.
    static Eigen::VectorXd direction(const Eigen::VectorXd& g, const Eigen::VectorXd& s,
                                     const Eigen::VectorXd& y);

private:
    LineSearchParams ls_;
    bool has_pair_ = false;
    Eigen::VectorXd s_;
    Eigen::VectorXd y_;
};

/// Dense inverse-Hessian BFGS.
class Bfgs final : public Optimizer {
public:
    explicit Bfgs(const TrainerSpec& spec);
    StepOutcome step(const Objective& objective, OptimizerState& state) override;
    const Eigen::MatrixXd& inverse_hessian() const { return H_; }

    /// Rank-two update of H; returns false (H untouched) when s'y <= 1e-10.
    static bool update_inverse_hessian(Eigen::MatrixXd& H, const Eigen::VectorXd& s, const Eigen::VectorXd& y);

private:
    LineSearchParams ls_;
    bool first_ = true;
    Eigen::MatrixXd H_;
};

/// Levenberg-Marquardt on the residual form of the objective.
class LevenbergMarquardt final : public Optimizer {
public:
    explicit LevenbergMarquardt(const TrainerSpec& spec);
    /// Retries with growing mu until a step lowers the loss.
    StepOutcome step(const Objective& objective, OptimizerState& state) override;
    /// One attempt: accepted steps divide mu by 10, rejected ones leave the state alone
    /// and multiply mu by 10. Throws NumericalDivergence once mu passes its ceiling.
    StepOutcome try_step(const Objective& objective, OptimizerState& state);
    double mu() const { return mu_; }
    std::size_t accepted_steps() const { return accepted_; }

private:
    double mu_;
    double mu_dec_;
    double mu_inc_;
    double mu_max_;
    std::size_t accepted_ = 0;
    bool cache_valid_ = false;
    Eigen::MatrixXd jtj_;
    Eigen::VectorXd jtr_;
};

std::unique_ptr<Optimizer> make_optimizer(const TrainerSpec& spec);

/// Epoch loop with the stopping protocol. Throws NumericalDivergence if the loss or
/// parameters become non-finite.
TrainRecord minimize(const Objective& train_objective, const Objective* validation_objective,
                     Optimizer& optimizer, const Eigen::VectorXd& initial, const TrainConfig& config);

struct TrainOutcome {
    nn::Network network;
    TrainRecord record;
};

/// Full-batch training on scaled data. An empty validation set disables early stopping.
TrainOutcome train(const nn::Network& network, const TrainerSpec& spec, const TrainConfig& config,
                   const features::FeatureDataset& train_set, const features::FeatureDataset& validation_set);

}  // namespace volnet::train
