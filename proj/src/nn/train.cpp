#include "deap/nn/train.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "deap/core/error.hpp"
#include "deap/core/rng.hpp"

namespace deap::nn {

void TrainConfig::validate() const {
    require(learning_rate > 0.0, "train: learning_rate must be > 0");
    require(batch_size > 0, "train: batch_size must be > 0");
    require(max_epochs > 0, "train: max_epochs must be > 0");
    require(patience > 0, "train: patience must be > 0");
    require(train_stride > 0 && val_stride > 0, "train: strides must be > 0");
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
    j = nlohmann::json{{"learning_rate", c.learning_rate}, {"batch_size", c.batch_size}, {"max_epochs", c.max_epochs},
                       {"patience", c.patience},           {"seed", c.seed},             {"train_stride", c.train_stride},
                       {"val_stride", c.val_stride},       {"beta1", c.beta1},           {"beta2", c.beta2},
                       {"epsilon", c.epsilon}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
    TrainConfig d;
    c.learning_rate = j.value("learning_rate", d.learning_rate);
    c.batch_size = j.value("batch_size", d.batch_size);
    c.max_epochs = j.value("max_epochs", d.max_epochs);
    c.patience = j.value("patience", d.patience);
    c.seed = j.value("seed", d.seed);
    c.train_stride = j.value("train_stride", d.train_stride);
    c.val_stride = j.value("val_stride", d.val_stride);
    c.beta1 = j.value("beta1", d.beta1);
    c.beta2 = j.value("beta2", d.beta2);
    c.epsilon = j.value("epsilon", d.epsilon);
}

void to_json(nlohmann::json& j, const TrainResult& r) {
    nlohmann::json h = nlohmann::json::array();
    for (const auto& e : r.history)
        h.push_back({{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"val_loss", e.val_loss}, {"seconds", e.seconds}});
    j = nlohmann::json{{"history", h},
                       {"initial_val_loss", r.initial_val_loss},
                       {"best_val_loss", r.best_val_loss},
                       {"best_epoch", r.best_epoch},
                       {"early_stopped", r.early_stopped}};
}

template <typename T>
Adam<T>::Adam(std::vector<Param<T>*> params, double lr, double beta1, double beta2, double eps)
    : params_(std::move(params)), lr_(lr), b1_(beta1), b2_(beta2), eps_(eps) {
    for (auto* p : params_) {
        m_.push_back(Mat<T>::Zero(p->value.rows(), p->value.cols()));
        v_.push_back(Mat<T>::Zero(p->value.rows(), p->value.cols()));
    }
}

template <typename T>
void Adam<T>::step() {
    ++t_;
    const T b1 = static_cast<T>(b1_), b2 = static_cast<T>(b2_);
    const T c1 = static_cast<T>(1.0 - std::pow(b1_, static_cast<double>(t_)));
    const T c2 = static_cast<T>(1.0 - std::pow(b2_, static_cast<double>(t_)));
    const T lr = static_cast<T>(lr_), eps = static_cast<T>(eps_);
    for (std::size_t i = 0; i < params_.size(); ++i) {
        auto& g = params_[i]->grad;
        m_[i] = b1 * m_[i] + (T(1) - b1) * g;
        v_[i] = b2 * v_[i] + (T(1) - b2) * g.cwiseProduct(g);
        params_[i]->value.array() -= lr * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + eps);
    }
}

template <typename T>
double mse_loss(const Mat<T>& out, const Mat<T>& target, Mat<T>* grad) {
    const Mat<T> diff = out - target;
    const double n = static_cast<double>(diff.size());
    if (grad) *grad = diff * static_cast<T>(2.0 / n);
    return diff.template cast<double>().squaredNorm() / n;
}

template <typename T>
double evaluate_loss(Network<T>& net, const Dataset& ds, const std::vector<WindowRef>& refs, int batch) {
    if (refs.empty()) return std::nan("");
    double total = 0.0;
    Mat<T> x, y;
    for (std::size_t b = 0; b < refs.size(); b += batch) {
        const std::size_t e = std::min(refs.size(), b + batch);
        ds.fill_batch(refs, b, e, x, y);
        total += mse_loss<T>(net.forward(x), y) * static_cast<double>(e - b);
    }
    return total / static_cast<double>(refs.size());
}

template <typename T>
TrainResult train(Network<T>& net, const Dataset& ds, const TrainConfig& cfg,
                  const std::function<void(const EpochRecord&)>& on_epoch) {
    cfg.validate();
    require(!ds.train_items.empty(), "train: no training episodes");
    std::vector<WindowRef> train_refs = ds.windows(ds.train_items, cfg.train_stride);
    const std::vector<WindowRef> val_refs = ds.windows(ds.val_items.empty() ? ds.train_items : ds.val_items,
                                                       cfg.val_stride);
    Adam<T> opt(net.params(), cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon);
    Rng rng(Rng::derive(cfg.seed, 0x5eed));

    TrainResult res;
    res.initial_val_loss = evaluate_loss(net, ds, val_refs);
    res.best_val_loss = res.initial_val_loss;
    res.best_weights = net.export_blobs();
    int since_best = 0;
    Mat<T> x, y, grad;
    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        for (std::size_t i = train_refs.size(); i > 1; --i) std::swap(train_refs[i - 1], train_refs[rng.below(i)]);
        double total = 0.0;
        for (std::size_t b = 0; b < train_refs.size(); b += cfg.batch_size) {
            const std::size_t e = std::min(train_refs.size(), b + static_cast<std::size_t>(cfg.batch_size));
            ds.fill_batch(train_refs, b, e, x, y);
            net.zero_grad();
            const double loss = mse_loss<T>(net.forward(x), y, &grad);
            if (!std::isfinite(loss)) {
                std::ostringstream msg;
                msg << "non-finite training loss at epoch " << epoch << ", batch " << b / cfg.batch_size
                    << " (windows";
                for (std::size_t k = b; k < e && k < b + 4; ++k)
                    msg << " " << ds.items[train_refs[k].item].recording_id << "@" << train_refs[k].start;
                msg << (e - b > 4 ? " ...)" : ")");
                throw NumericalError(msg.str());
            }
            net.backward(grad);
            opt.step();
            total += loss * static_cast<double>(e - b);
        }
        EpochRecord rec;
        rec.epoch = epoch;
        rec.train_loss = total / static_cast<double>(train_refs.size());
        rec.val_loss = evaluate_loss(net, ds, val_refs);
        rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        res.history.push_back(rec);
        if (on_epoch) on_epoch(rec);
        if (rec.val_loss < res.best_val_loss) {
            res.best_val_loss = rec.val_loss;
            res.best_epoch = epoch;
            res.best_weights = net.export_blobs();
            since_best = 0;
        } else if (++since_best >= cfg.patience) {
            res.early_stopped = true;
            break;
        }
    }
    net.import_blobs(res.best_weights);
    return res;
}

template <typename T>
std::vector<double> overfit_batch(Network<T>& net, const Mat<T>& x, const Mat<T>& y, int steps, double lr) {
    Adam<T> opt(net.params(), lr);
    std::vector<double> losses;
    Mat<T> grad;
    for (int s = 0; s < steps; ++s) {
        net.zero_grad();
        losses.push_back(mse_loss<T>(net.forward(x), y, &grad));
        net.backward(grad);
        opt.step();
    }
    return losses;
}

template class Adam<float>;
template class Adam<double>;
template double mse_loss<float>(const Mat<float>&, const Mat<float>&, Mat<float>*);
template double mse_loss<double>(const Mat<double>&, const Mat<double>&, Mat<double>*);
template double evaluate_loss<float>(Network<float>&, const Dataset&, const std::vector<WindowRef>&, int);
template double evaluate_loss<double>(Network<double>&, const Dataset&, const std::vector<WindowRef>&, int);
template TrainResult train<float>(Network<float>&, const Dataset&, const TrainConfig&,
                                  const std::function<void(const EpochRecord&)>&);
template TrainResult train<double>(Network<double>&, const Dataset&, const TrainConfig&,
                                   const std::function<void(const EpochRecord&)>&);
template std::vector<double> overfit_batch<float>(Network<float>&, const Mat<float>&, const Mat<float>&, int, double);
template std::vector<double> overfit_batch<double>(Network<double>&, const Mat<double>&, const Mat<double>&, int,
                                                   double);

}  // namespace deap::nn
