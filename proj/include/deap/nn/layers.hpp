#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "deap/core/rng.hpp"

namespace deap::nn {

template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <typename T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

/// A trainable tensor with its gradient, stored flat.
template <typename T>
struct Param {
    std::string name;
    Mat<T> value;
    Mat<T> grad;

    void zero_grad() { grad.setZero(value.rows(), value.cols()); }
    Eigen::Index size() const { return value.size(); }
};

/// Activations are matrices with one row per channel and one column per
/// (sample, position) pair, position fastest.

/// 1-D convolution applied to every sequence independently.
template <typename T>
class Conv1d {
public:
    Conv1d(std::string name, int in_ch, int out_ch, int kernel, int stride, int pad);

    int out_length(int length) const { return (length + 2 * pad_ - k_) / stride_ + 1; }
    /// x: in_ch x (n_seq * length).
    Mat<T> forward(const Mat<T>& x, int n_seq, int length);
    /// Accumulates parameter gradients and returns dL/dx.
    Mat<T> backward(const Mat<T>& dy);
    std::vector<Param<T>*> params() { return {&weight, &bias}; }
    void init(Rng& rng);

    Param<T> weight;  // out_ch x (in_ch * kernel)
    Param<T> bias;    // out_ch x 1

private:
    int in_ch_, out_ch_, k_, stride_, pad_;
    int n_seq_ = 0, length_ = 0;
    Mat<T> cols_;
};

/// y = W x + b, one column per sample.
template <typename T>
class Dense {
public:
    Dense(std::string name, int in, int out);

    Mat<T> forward(const Mat<T>& x);
    Mat<T> backward(const Mat<T>& dy);
    std::vector<Param<T>*> params() { return {&weight, &bias}; }
    void init(Rng& rng);

    Param<T> weight;  // out x in
    Param<T> bias;    // out x 1

private:
    Mat<T> x_;
};

/// 2-D transposed convolution (kernel k, stride s, padding p); output side
/// is (in - 1) * s - 2p + k.
template <typename T>
class ConvTranspose2d {
public:
    ConvTranspose2d(std::string name, int in_ch, int out_ch, int kernel, int stride, int pad);

    int out_size(int in) const { return (in - 1) * stride_ - 2 * pad_ + k_; }
    /// x: in_ch x (batch * h * w).
    Mat<T> forward(const Mat<T>& x, int batch, int h, int w);
    Mat<T> backward(const Mat<T>& dy);
    std::vector<Param<T>*> params() { return {&weight, &bias}; }
    void init(Rng& rng);

    Param<T> weight;  // in_ch x (out_ch * k * k)
    Param<T> bias;    // out_ch x 1

private:
    int in_ch_, out_ch_, k_, stride_, pad_;
    int batch_ = 0, h_ = 0, w_ = 0;
    Mat<T> x_;
};

/// Elementwise nonlinearities keep their output for the backward pass.
template <typename T>
struct Tanh {
    Mat<T> y;
    Mat<T> forward(const Mat<T>& x);
    Mat<T> backward(const Mat<T>& dy) const;
};

template <typename T>
struct Sigmoid {
    Mat<T> y;
    Mat<T> forward(const Mat<T>& x);
    Mat<T> backward(const Mat<T>& dy) const;
};

}  // namespace deap::nn
