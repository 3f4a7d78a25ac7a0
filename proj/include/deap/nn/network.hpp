#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "deap/nn/layers.hpp"
#include "json.hpp"

namespace deap::nn {

/// Encoder-decoder shape. The encoder runs the same temporal convolution
/// stack on every channel, the dense layers mix channels into the latent
/// vector, and transposed convolutions grow a seed_ch x seed x seed map to
/// grid x grid.
struct Architecture {
    int channels = 20;
    int window = 96;
    int grid = 32;
    std::vector<int> enc_channels{8, 16, 16};
    std::vector<int> enc_kernels{7, 5, 5};
    int hidden = 256;
    int seed_ch = 32;
    int seed = 4;
    std::vector<int> dec_channels{32, 16};

    void validate() const;
    int encoded_length() const;
    int latent() const { return seed_ch * seed * seed; }
};

void to_json(nlohmann::json& j, const Architecture& a);
void from_json(const nlohmann::json& j, Architecture& a);

using Blobs = std::map<std::string, std::vector<double>>;

template <typename T>
class Network {
public:
    explicit Network(const Architecture& arch = {});

    const Architecture& arch() const { return arch_; }
    /// Uniform(+-1/sqrt(fan_in)) weights and biases from `seed`.
    void init(std::uint64_t seed);
    /// Zeroes the last transposed convolution, so every output is 0.5.
    void zero_final_layer();

    /// x: (channels * window) x batch, row = ch * window + t.
    /// Returns (grid * grid) x batch in [0, 1], row = r * grid + c.
    Mat<T> forward(const Mat<T>& x);
    /// Accumulates parameter gradients for dL/d(output) of the last forward.
    void backward(const Mat<T>& dout);

    std::vector<Param<T>*> params();
    std::size_t parameter_count();
    void zero_grad();

    Blobs export_blobs();
    void import_blobs(const Blobs& blobs);

private:
    Architecture arch_;
    std::vector<Conv1d<T>> enc_;
    std::vector<Tanh<T>> enc_act_;
    Dense<T> fc1_, fc2_;
    Tanh<T> fc1_act_, fc2_act_;
    std::vector<ConvTranspose2d<T>> dec_;
    std::vector<Tanh<T>> dec_act_;
    Sigmoid<T> out_act_;
    int batch_ = 0;
};

extern template class Network<float>;
extern template class Network<double>;

}  // namespace deap::nn
