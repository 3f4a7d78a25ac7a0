#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "deap/nn/dataset.hpp"
#include "deap/nn/network.hpp"

namespace deap::nn {

struct TrainConfig {
    double learning_rate = 1e-3;
    int batch_size = 32;
    int max_epochs = 50;
    int patience = 5;
    std::uint64_t seed = 1;
    int train_stride = kTrainStride;
    /// Validation windows for early stopping; 1 scores every window.
    int val_stride = kTrainStride;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    void validate() const;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

/// Adaptive-moment gradient descent over a fixed parameter list.
template <typename T>
class Adam {
public:
    Adam(std::vector<Param<T>*> params, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
    void step();
    long steps() const { return t_; }

private:
    std::vector<Param<T>*> params_;
    std::vector<Mat<T>> m_, v_;
    double lr_, b1_, b2_, eps_;
    long t_ = 0;
};

/// Mean squared error over all outputs and its gradient.
template <typename T>
double mse_loss(const Mat<T>& out, const Mat<T>& target, Mat<T>* grad = nullptr);

struct EpochRecord {
    int epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
    double seconds = 0.0;
};

struct TrainResult {
    std::vector<EpochRecord> history;
    double initial_val_loss = 0.0;
    double best_val_loss = 0.0;
    int best_epoch = -1;
    bool early_stopped = false;
    Blobs best_weights;
};

void to_json(nlohmann::json& j, const TrainResult& r);

/// Mean loss over windows, evaluated in batches.
template <typename T>
double evaluate_loss(Network<T>& net, const Dataset& ds, const std::vector<WindowRef>& refs, int batch = 256);

/// Trains on ds.train_items, early-stops on ds.val_items and leaves the best
/// weights loaded in `net`. Shuffling is seeded, so runs are repeatable.
template <typename T>
TrainResult train(Network<T>& net, const Dataset& ds, const TrainConfig& cfg,
                  const std::function<void(const EpochRecord&)>& on_epoch = {});

/// Repeated Adam steps on one batch; returns the loss before every step.
template <typename T>
std::vector<double> overfit_batch(Network<T>& net, const Mat<T>& x, const Mat<T>& y, int steps, double lr = 1e-3);

}  // namespace deap::nn
