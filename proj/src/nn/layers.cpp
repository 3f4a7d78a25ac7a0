#include "deap/nn/layers.hpp"

#include <cmath>

namespace deap::nn {

namespace {

template <typename T>
void fill_uniform(Mat<T>& m, Rng& rng, double bound) {
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<T>(rng.uniform(-bound, bound));
}

}  // namespace

template <typename T>
Conv1d<T>::Conv1d(std::string name, int in_ch, int out_ch, int kernel, int stride, int pad)
    : in_ch_(in_ch), out_ch_(out_ch), k_(kernel), stride_(stride), pad_(pad) {
    weight.name = name + ".weight";
    bias.name = name + ".bias";
    weight.value = Mat<T>::Zero(out_ch, in_ch * kernel);
    bias.value = Mat<T>::Zero(out_ch, 1);
}

template <typename T>
void Conv1d<T>::init(Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(in_ch_ * k_));
    fill_uniform(weight.value, rng, bound);
    fill_uniform(bias.value, rng, bound);
}

template <typename T>
Mat<T> Conv1d<T>::forward(const Mat<T>& x, int n_seq, int length) {
    n_seq_ = n_seq;
    length_ = length;
    const int lout = out_length(length);
    const Eigen::Index ncol = static_cast<Eigen::Index>(n_seq) * lout;
    cols_.setZero(in_ch_ * k_, ncol);
    for (int n = 0; n < n_seq; ++n)
        for (int lo = 0; lo < lout; ++lo) {
            T* col = cols_.data() + (static_cast<Eigen::Index>(n) * lout + lo) * cols_.rows();
            for (int ci = 0; ci < in_ch_; ++ci)
                for (int j = 0; j < k_; ++j) {
                    const int li = lo * stride_ + j - pad_;
                    if (li >= 0 && li < length) col[ci * k_ + j] = x(ci, static_cast<Eigen::Index>(n) * length + li);
                }
        }
    Mat<T> y = weight.value * cols_;
    y.colwise() += bias.value.col(0);
    return y;
}

template <typename T>
Mat<T> Conv1d<T>::backward(const Mat<T>& dy) {
    weight.grad.noalias() += dy * cols_.transpose();
    bias.grad.col(0) += dy.rowwise().sum();
    const Mat<T> dcols = weight.value.transpose() * dy;
    const int lout = out_length(length_);
    Mat<T> dx = Mat<T>::Zero(in_ch_, static_cast<Eigen::Index>(n_seq_) * length_);
    for (int n = 0; n < n_seq_; ++n)
        for (int lo = 0; lo < lout; ++lo) {
            const T* col = dcols.data() + (static_cast<Eigen::Index>(n) * lout + lo) * dcols.rows();
            for (int ci = 0; ci < in_ch_; ++ci)
                for (int j = 0; j < k_; ++j) {
                    const int li = lo * stride_ + j - pad_;
                    if (li >= 0 && li < length_) dx(ci, static_cast<Eigen::Index>(n) * length_ + li) += col[ci * k_ + j];
                }
        }
    return dx;
}

template <typename T>
Dense<T>::Dense(std::string name, int in, int out) {
    weight.name = name + ".weight";
    bias.name = name + ".bias";
    weight.value = Mat<T>::Zero(out, in);
    bias.value = Mat<T>::Zero(out, 1);
}

template <typename T>
void Dense<T>::init(Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(weight.value.cols()));
    fill_uniform(weight.value, rng, bound);
    fill_uniform(bias.value, rng, bound);
}

template <typename T>
Mat<T> Dense<T>::forward(const Mat<T>& x) {
    x_ = x;
    Mat<T> y = weight.value * x;
    y.colwise() += bias.value.col(0);
    return y;
}

template <typename T>
Mat<T> Dense<T>::backward(const Mat<T>& dy) {
    weight.grad.noalias() += dy * x_.transpose();
    bias.grad.col(0) += dy.rowwise().sum();
    return weight.value.transpose() * dy;
}

template <typename T>
ConvTranspose2d<T>::ConvTranspose2d(std::string name, int in_ch, int out_ch, int kernel, int stride, int pad)
    : in_ch_(in_ch), out_ch_(out_ch), k_(kernel), stride_(stride), pad_(pad) {
    weight.name = name + ".weight";
    bias.name = name + ".bias";
    weight.value = Mat<T>::Zero(in_ch, out_ch * kernel * kernel);
    bias.value = Mat<T>::Zero(out_ch, 1);
}

template <typename T>
void ConvTranspose2d<T>::init(Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(out_ch_ * k_ * k_));
    fill_uniform(weight.value, rng, bound);
    fill_uniform(bias.value, rng, bound);
}

template <typename T>
Mat<T> ConvTranspose2d<T>::forward(const Mat<T>& x, int batch, int h, int w) {
    batch_ = batch;
    h_ = h;
    w_ = w;
    x_ = x;
    const int oh = out_size(h), ow = out_size(w);
    const Mat<T> cols = weight.value.transpose() * x;  // (out_ch*k*k) x (batch*h*w)
    Mat<T> y(out_ch_, static_cast<Eigen::Index>(batch) * oh * ow);
    y.colwise() = bias.value.col(0);
    for (int b = 0; b < batch; ++b)
        for (int ih = 0; ih < h; ++ih)
            for (int iw = 0; iw < w; ++iw) {
                const T* col = cols.data() + (static_cast<Eigen::Index>(b) * h * w + ih * w + iw) * cols.rows();
                for (int kh = 0; kh < k_; ++kh) {
                    const int r = ih * stride_ - pad_ + kh;
                    if (r < 0 || r >= oh) continue;
                    for (int kw = 0; kw < k_; ++kw) {
                        const int c = iw * stride_ - pad_ + kw;
                        if (c < 0 || c >= ow) continue;
                        T* out = y.data() + (static_cast<Eigen::Index>(b) * oh * ow + r * ow + c) * out_ch_;
                        for (int co = 0; co < out_ch_; ++co) out[co] += col[(co * k_ + kh) * k_ + kw];
                    }
                }
            }
    return y;
}

template <typename T>
Mat<T> ConvTranspose2d<T>::backward(const Mat<T>& dy) {
    const int oh = out_size(h_), ow = out_size(w_);
    bias.grad.col(0) += dy.rowwise().sum();
    Mat<T> dcols = Mat<T>::Zero(out_ch_ * k_ * k_, static_cast<Eigen::Index>(batch_) * h_ * w_);
    for (int b = 0; b < batch_; ++b)
        for (int ih = 0; ih < h_; ++ih)
            for (int iw = 0; iw < w_; ++iw) {
                T* col = dcols.data() + (static_cast<Eigen::Index>(b) * h_ * w_ + ih * w_ + iw) * dcols.rows();
                for (int kh = 0; kh < k_; ++kh) {
                    const int r = ih * stride_ - pad_ + kh;
                    if (r < 0 || r >= oh) continue;
                    for (int kw = 0; kw < k_; ++kw) {
                        const int c = iw * stride_ - pad_ + kw;
                        if (c < 0 || c >= ow) continue;
                        const T* g = dy.data() + (static_cast<Eigen::Index>(b) * oh * ow + r * ow + c) * out_ch_;
                        for (int co = 0; co < out_ch_; ++co) col[(co * k_ + kh) * k_ + kw] = g[co];
                    }
                }
            }
    weight.grad.noalias() += x_ * dcols.transpose();
    return weight.value * dcols;
}

template <typename T>
Mat<T> Tanh<T>::forward(const Mat<T>& x) {
    y = x.array().tanh().matrix();
    return y;
}

template <typename T>
Mat<T> Tanh<T>::backward(const Mat<T>& dy) const {
    return (dy.array() * (T(1) - y.array().square())).matrix();
}

template <typename T>
Mat<T> Sigmoid<T>::forward(const Mat<T>& x) {
    y = (T(1) / (T(1) + (-x.array()).exp())).matrix();
    return y;
}

template <typename T>
Mat<T> Sigmoid<T>::backward(const Mat<T>& dy) const {
    return (dy.array() * y.array() * (T(1) - y.array())).matrix();
}

template class Conv1d<float>;
template class Conv1d<double>;
template class Dense<float>;
template class Dense<double>;
template class ConvTranspose2d<float>;
template class ConvTranspose2d<double>;
template struct Tanh<float>;
template struct Tanh<double>;
template struct Sigmoid<float>;
template struct Sigmoid<double>;

}  // namespace deap::nn
