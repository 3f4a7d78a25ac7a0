#include "deap/nn/network.hpp"

#include "deap/core/error.hpp"

namespace deap::nn {

void Architecture::validate() const {
    require(channels > 0 && window > 0 && grid > 0, "architecture: sizes must be positive");
    require(!enc_channels.empty() && enc_channels.size() == enc_kernels.size(),
            "architecture: enc_channels and enc_kernels must have equal non-zero length");
    for (int k : enc_kernels) require(k % 2 == 1, "architecture: encoder kernels must be odd");
    require(window % (1 << enc_channels.size()) == 0, "architecture: window must be divisible by 2^encoder depth");
    require(seed * (1 << (dec_channels.size() + 1)) == grid,
            "architecture: seed * 2^(decoder depth + 1) must equal grid");
    require(hidden > 0 && seed_ch > 0, "architecture: hidden and seed_ch must be positive");
}

int Architecture::encoded_length() const { return window >> enc_channels.size(); }

void to_json(nlohmann::json& j, const Architecture& a) {
    j = nlohmann::json{{"channels", a.channels},       {"window", a.window},   {"grid", a.grid},
                       {"enc_channels", a.enc_channels}, {"enc_kernels", a.enc_kernels}, {"hidden", a.hidden},
                       {"seed_ch", a.seed_ch},         {"seed", a.seed},       {"dec_channels", a.dec_channels}};
}

void from_json(const nlohmann::json& j, Architecture& a) {
    Architecture d;
    a.channels = j.value("channels", d.channels);
    a.window = j.value("window", d.window);
    a.grid = j.value("grid", d.grid);
    a.enc_channels = j.value("enc_channels", d.enc_channels);
    a.enc_kernels = j.value("enc_kernels", d.enc_kernels);
    a.hidden = j.value("hidden", d.hidden);
    a.seed_ch = j.value("seed_ch", d.seed_ch);
    a.seed = j.value("seed", d.seed);
    a.dec_channels = j.value("dec_channels", d.dec_channels);
}

namespace {

Architecture checked(const Architecture& a) {
    a.validate();
    return a;
}

}  // namespace

template <typename T>
Network<T>::Network(const Architecture& arch)
    : arch_(checked(arch)),
      fc1_("fc1", arch.channels * arch.enc_channels.back() * arch.encoded_length(), arch.hidden),
      fc2_("fc2", arch.hidden, arch.latent()) {
    int in = 1;
    for (std::size_t i = 0; i < arch_.enc_channels.size(); ++i) {
        const int k = arch_.enc_kernels[i];
        enc_.emplace_back("enc" + std::to_string(i), in, arch_.enc_channels[i], k, 2, k / 2);
        in = arch_.enc_channels[i];
    }
    enc_act_.resize(enc_.size());
    in = arch_.seed_ch;
    for (std::size_t i = 0; i < arch_.dec_channels.size(); ++i) {
        dec_.emplace_back("dec" + std::to_string(i), in, arch_.dec_channels[i], 4, 2, 1);
        in = arch_.dec_channels[i];
    }
    dec_.emplace_back("dec" + std::to_string(arch_.dec_channels.size()), in, 1, 4, 2, 1);
    dec_act_.resize(arch_.dec_channels.size());
}

template <typename T>
void Network<T>::init(std::uint64_t seed) {
    Rng rng(seed);
    for (auto& l : enc_) l.init(rng);
    fc1_.init(rng);
    fc2_.init(rng);
    for (auto& l : dec_) l.init(rng);
}

template <typename T>
void Network<T>::zero_final_layer() {
    dec_.back().weight.value.setZero();
    dec_.back().bias.value.setZero();
}

template <typename T>
Mat<T> Network<T>::forward(const Mat<T>& x) {
    const Architecture& a = arch_;
    if (x.rows() != static_cast<Eigen::Index>(a.channels) * a.window)
        throw PreconditionError("network input has " + std::to_string(x.rows()) + " rows, expected " +
                                std::to_string(a.channels * a.window));
    batch_ = static_cast<int>(x.cols());
    const int n_seq = batch_ * a.channels;

    // Column-major (ch*window + t) x batch is already 1 x (n_seq * window).
    Mat<T> h = Eigen::Map<const Mat<T>>(x.data(), 1, x.size());
    int length = a.window;
    for (std::size_t i = 0; i < enc_.size(); ++i) {
        h = enc_act_[i].forward(enc_[i].forward(h, n_seq, length));
        length = enc_[i].out_length(length);
    }

    // (co x (b*C + ch)*L + l) -> (ch*Co*L + co*L + l) x b
    const int co_n = a.enc_channels.back();
    Mat<T> flat(static_cast<Eigen::Index>(a.channels) * co_n * length, batch_);
    for (int b = 0; b < batch_; ++b)
        for (int ch = 0; ch < a.channels; ++ch)
            for (int co = 0; co < co_n; ++co)
                for (int l = 0; l < length; ++l)
                    flat((ch * co_n + co) * length + l, b) = h(co, (static_cast<Eigen::Index>(b) * a.channels + ch) * length + l);

    Mat<T> z = fc2_act_.forward(fc2_.forward(fc1_act_.forward(fc1_.forward(flat))));

    // (c*S*S + p) x b -> c x (b*S*S + p)
    const int ss = a.seed * a.seed;
    Mat<T> img(a.seed_ch, static_cast<Eigen::Index>(batch_) * ss);
    for (int b = 0; b < batch_; ++b)
        for (int c = 0; c < a.seed_ch; ++c)
            for (int p = 0; p < ss; ++p) img(c, static_cast<Eigen::Index>(b) * ss + p) = z(c * ss + p, b);

    int side = a.seed;
    for (std::size_t i = 0; i < dec_.size(); ++i) {
        img = dec_[i].forward(img, batch_, side, side);
        side = dec_[i].out_size(side);
        if (i < dec_act_.size()) img = dec_act_[i].forward(img);
    }
    img = out_act_.forward(img);
    return Eigen::Map<const Mat<T>>(img.data(), static_cast<Eigen::Index>(a.grid) * a.grid, batch_);
}

template <typename T>
void Network<T>::backward(const Mat<T>& dout) {
    const Architecture& a = arch_;
    require(dout.cols() == batch_ && dout.rows() == static_cast<Eigen::Index>(a.grid) * a.grid,
            "network backward: gradient shape does not match the last forward pass");
    Mat<T> g = Eigen::Map<const Mat<T>>(dout.data(), 1, dout.size());
    g = out_act_.backward(g);
    for (std::size_t i = dec_.size(); i-- > 0;) {
        if (i < dec_act_.size()) g = dec_act_[i].backward(g);
        g = dec_[i].backward(g);
    }

    const int ss = a.seed * a.seed;
    Mat<T> dz(static_cast<Eigen::Index>(a.latent()), batch_);
    for (int b = 0; b < batch_; ++b)
        for (int c = 0; c < a.seed_ch; ++c)
            for (int p = 0; p < ss; ++p) dz(c * ss + p, b) = g(c, static_cast<Eigen::Index>(b) * ss + p);

    Mat<T> dflat = fc1_.backward(fc1_act_.backward(fc2_.backward(fc2_act_.backward(dz))));

    const int co_n = a.enc_channels.back();
    const int length = a.encoded_length();
    Mat<T> dh(co_n, static_cast<Eigen::Index>(batch_) * a.channels * length);
    for (int b = 0; b < batch_; ++b)
        for (int ch = 0; ch < a.channels; ++ch)
            for (int co = 0; co < co_n; ++co)
                for (int l = 0; l < length; ++l)
                    dh(co, (static_cast<Eigen::Index>(b) * a.channels + ch) * length + l) = dflat((ch * co_n + co) * length + l, b);

    for (std::size_t i = enc_.size(); i-- > 0;) dh = enc_[i].backward(enc_act_[i].backward(dh));
}

template <typename T>
std::vector<Param<T>*> Network<T>::params() {
    std::vector<Param<T>*> out;
    auto add = [&](auto& layer) {
        for (auto* p : layer.params()) out.push_back(p);
    };
    for (auto& l : enc_) add(l);
    add(fc1_);
    add(fc2_);
    for (auto& l : dec_) add(l);
    return out;
}

template <typename T>
std::size_t Network<T>::parameter_count() {
    std::size_t n = 0;
    for (auto* p : params()) n += static_cast<std::size_t>(p->size());
    return n;
}

template <typename T>
void Network<T>::zero_grad() {
    for (auto* p : params()) p->zero_grad();
}

template <typename T>
Blobs Network<T>::export_blobs() {
    Blobs out;
    for (auto* p : params()) {
        std::vector<double> v(static_cast<std::size_t>(p->size()));
        for (Eigen::Index i = 0; i < p->size(); ++i) v[i] = static_cast<double>(p->value.data()[i]);
        out[p->name] = std::move(v);
    }
    return out;
}

template <typename T>
void Network<T>::import_blobs(const Blobs& blobs) {
    for (auto* p : params()) {
        auto it = blobs.find(p->name);
        if (it == blobs.end()) throw FormatError("model is missing weight blob " + p->name);
        if (it->second.size() != static_cast<std::size_t>(p->size()))
            throw FormatError("weight blob " + p->name + " has " + std::to_string(it->second.size()) +
                              " values, expected " + std::to_string(p->size()));
        for (Eigen::Index i = 0; i < p->size(); ++i) p->value.data()[i] = static_cast<T>(it->second[i]);
    }
}

template class Network<float>;
template class Network<double>;

}  // namespace deap::nn
