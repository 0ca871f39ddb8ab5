// Copyright 2026 The LAMP Authors
// SPDX-License-Identifier: Apache-2.0

#include "lamp/formats.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>

namespace lamp::io {

namespace {

class Writer {
public:
    void bytes(std::string_view s) { out_.insert(out_.end(), s.begin(), s.end()); }
    void u8(std::uint8_t v) { out_.push_back(v); }
    void u16(std::uint16_t v) { put(v, 2); }
    void u32(std::uint32_t v) { put(v, 4); }
    void u64(std::uint64_t v) { put(v, 8); }
    void f32(float v) { put(std::bit_cast<std::uint32_t>(v), 4); }

    std::vector<std::uint8_t> take() { return std::move(out_); }

private:
    void put(std::uint64_t v, int width) {
        for (int i = 0; i < width; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    std::vector<std::uint8_t> out_;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> data) : data_(data) {}

    std::size_t offset() const { return pos_; }
    std::size_t remaining() const { return data_.size() - pos_; }

    void magic(std::string_view expected) {
        need(expected.size(), "magic");
        for (std::size_t i = 0; i < expected.size(); ++i) {
            if (data_[pos_ + i] != static_cast<std::uint8_t>(expected[i])) {
                throw FormatError("bad magic, expected \"" + std::string(expected) + "\"", pos_);
            }
        }
        pos_ += expected.size();
    }
    std::uint8_t u8(const char* what) { return static_cast<std::uint8_t>(get(1, what)); }
    std::uint16_t u16(const char* what) { return static_cast<std::uint16_t>(get(2, what)); }
    std::uint32_t u32(const char* what) { return static_cast<std::uint32_t>(get(4, what)); }
    std::uint64_t u64(const char* what) { return get(8, what); }
    float f32(const char* what) { return std::bit_cast<float>(u32(what)); }
    std::string text(std::size_t n, const char* what) {
        need(n, what);
        std::string s(reinterpret_cast<const char*>(data_.data() + pos_), n);
        pos_ += n;
        return s;
    }
    void need(std::size_t n, const char* what) const {
        if (remaining() < n) {
            throw FormatError(std::string("truncated input while reading ") + what, pos_);
        }
    }
    void finish() const {
        if (remaining() != 0) throw FormatError("unexpected trailing bytes", pos_);
    }

private:
    std::uint64_t get(int width, const char* what) {
        need(static_cast<std::size_t>(width), what);
        std::uint64_t v = 0;
        for (int i = 0; i < width; ++i) v |= std::uint64_t{data_[pos_ + i]} << (8 * i);
        pos_ += static_cast<std::size_t>(width);
        return v;
    }

    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
};

NamedTensor matrix_tensor(std::string name, const Tensor2D& t) {
    return {std::move(name), {t.rows, t.cols}, t.data};
}

NamedTensor vector_tensor(std::string name, const std::vector<float>& v) {
    return {std::move(name), {v.size()}, v};
}

std::string layer_name(std::size_t l, const char* suffix) {
    return "h." + std::to_string(l) + "." + suffix;
}

class TensorTable {
public:
    TensorTable(std::span<const NamedTensor> tensors, std::size_t offset) : offset_(offset) {
        for (const auto& t : tensors) by_name_.emplace(t.name, &t);
    }

    const NamedTensor& get(const std::string& name) const {
        auto it = by_name_.find(name);
        if (it == by_name_.end()) throw FormatError("missing tensor '" + name + "'", offset_);
        return *it->second;
    }

    Tensor2D matrix(const std::string& name, std::size_t rows, std::size_t cols) const {
        const auto& t = get(name);
        if (t.dims.size() != 2 || t.dims[0] != rows || t.dims[1] != cols) {
            throw FormatError("tensor '" + name + "' has shape " + shape(t) + ", expected [" +
                                  std::to_string(rows) + ", " + std::to_string(cols) + "]",
                              offset_);
        }
        return Tensor2D(rows, cols, t.values);
    }

    std::vector<float> vec(const std::string& name, std::size_t n) const {
        const auto& t = get(name);
        if (t.dims.size() != 1 || t.dims[0] != n) {
            throw FormatError("tensor '" + name + "' has shape " + shape(t) + ", expected [" +
                                  std::to_string(n) + "]",
                              offset_);
        }
        return t.values;
    }

    bool has(const std::string& name) const { return by_name_.count(name) != 0; }
    std::size_t offset() const { return offset_; }

private:
    static std::string shape(const NamedTensor& t) {
        std::string s = "[";
        for (std::size_t i = 0; i < t.dims.size(); ++i) {
            if (i) s += ", ";
            s += std::to_string(t.dims[i]);
        }
        return s + "]";
    }

    std::map<std::string, const NamedTensor*> by_name_;
    std::size_t offset_;
};

}  // namespace

std::vector<std::uint8_t> encode_weights(std::span<const NamedTensor> tensors) {
    Writer w;
    w.bytes(kWeightsMagic);
    w.u32(static_cast<std::uint32_t>(tensors.size()));
    for (const auto& t : tensors) {
        if (t.name.size() > std::numeric_limits<std::uint16_t>::max()) {
            throw ContractViolation("encode_weights: tensor name too long: " + t.name);
        }
        std::uint64_t count = 1;
        for (auto d : t.dims) count *= d;
        if (count != t.values.size() || t.dims.size() > 255) {
            throw ContractViolation("encode_weights: dims do not match payload for " + t.name);
        }
        w.u16(static_cast<std::uint16_t>(t.name.size()));
        w.bytes(t.name);
        w.u8(static_cast<std::uint8_t>(t.dims.size()));
        for (auto d : t.dims) w.u64(d);
        for (float v : t.values) w.f32(v);
    }
    return w.take();
}

std::vector<NamedTensor> decode_weights(std::span<const std::uint8_t> bytes) {
    Reader r(bytes);
    r.magic(kWeightsMagic);
    const std::uint32_t count = r.u32("tensor count");
    std::vector<NamedTensor> out;
    std::set<std::string> seen;
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::size_t start = r.offset();
        NamedTensor t;
        const std::uint16_t name_len = r.u16("tensor name length");
        t.name = r.text(name_len, "tensor name");
        if (!seen.insert(t.name).second) {
            throw FormatError("duplicate tensor '" + t.name + "'", start);
        }
        const std::uint8_t rank = r.u8("tensor rank");
        for (std::uint8_t k = 0; k < rank; ++k) t.dims.push_back(r.u64("tensor dims"));
        std::uint64_t elements = 1;
        bool overflow = false;
        for (std::uint64_t d : t.dims) {
            if (d != 0 && elements > std::numeric_limits<std::uint64_t>::max() / d) overflow = true;
            elements *= d;
        }
        if (std::find(t.dims.begin(), t.dims.end(), 0) != t.dims.end()) elements = 0;
        if (overflow || elements > r.remaining() / 4) {
            throw FormatError("tensor '" + t.name + "' dims exceed the remaining file size",
                              r.offset());
        }
        t.values.resize(static_cast<std::size_t>(elements));
        for (auto& v : t.values) v = r.f32("tensor payload");
        out.push_back(std::move(t));
    }
    r.finish();
    return out;
}

std::vector<std::uint8_t> encode_tokens(std::span<const Sequence> dataset) {
    Writer w;
    w.bytes(kTokensMagic);
    w.u32(static_cast<std::uint32_t>(dataset.size()));
    for (const auto& seq : dataset) {
        w.u32(static_cast<std::uint32_t>(seq.size()));
        for (auto id : seq) w.u32(id);
    }
    return w.take();
}

std::vector<std::uint8_t> encode_tokens(const Dataset& dataset) {
    return encode_tokens(std::span<const Sequence>(dataset));
}

Dataset decode_tokens(std::span<const std::uint8_t> bytes) {
    Reader r(bytes);
    r.magic(kTokensMagic);
    const std::uint32_t count = r.u32("sequence count");
    Dataset out;
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::uint32_t len = r.u32("sequence length");
        r.need(std::size_t{len} * 4, "token ids");
        Sequence seq(len);
        for (auto& id : seq) id = r.u32("token id");
        out.push_back(std::move(seq));
    }
    r.finish();
    return out;
}

std::vector<NamedTensor> model_to_tensors(const model::Model& m) {
    const auto& w = m.weights;
    std::vector<NamedTensor> out;
    out.push_back({"meta.n_head", {1}, {static_cast<float>(m.config.n_heads)}});
    out.push_back(matrix_tensor("wte", w.token_embedding));
    out.push_back(matrix_tensor("wpe", w.position_embedding));
    for (std::size_t l = 0; l < w.layers.size(); ++l) {
        const auto& L = w.layers[l];
        out.push_back(vector_tensor(layer_name(l, "ln_1.g"), L.ln1_gamma));
        out.push_back(vector_tensor(layer_name(l, "ln_1.b"), L.ln1_beta));
        out.push_back(matrix_tensor(layer_name(l, "attn.c_attn.w"), L.attn_w));
        out.push_back(vector_tensor(layer_name(l, "attn.c_attn.b"), L.attn_b));
        out.push_back(matrix_tensor(layer_name(l, "attn.c_proj.w"), L.proj_w));
        out.push_back(vector_tensor(layer_name(l, "attn.c_proj.b"), L.proj_b));
        out.push_back(vector_tensor(layer_name(l, "ln_2.g"), L.ln2_gamma));
        out.push_back(vector_tensor(layer_name(l, "ln_2.b"), L.ln2_beta));
        out.push_back(matrix_tensor(layer_name(l, "mlp.c_fc.w"), L.fc_w));
        out.push_back(vector_tensor(layer_name(l, "mlp.c_fc.b"), L.fc_b));
        out.push_back(matrix_tensor(layer_name(l, "mlp.c_proj.w"), L.out_w));
        out.push_back(vector_tensor(layer_name(l, "mlp.c_proj.b"), L.out_b));
    }
    out.push_back(vector_tensor("ln_f.g", w.lnf_gamma));
    out.push_back(vector_tensor("ln_f.b", w.lnf_beta));
    return out;
}

model::Model model_from_tensors(std::span<const NamedTensor> tensors, std::size_t end_offset) {
    const TensorTable table(tensors, end_offset);
    model::Model m;
    auto& c = m.config;

    const auto& wte = table.get("wte");
    const auto& wpe = table.get("wpe");
    if (wte.dims.size() != 2 || wpe.dims.size() != 2 || wte.dims[1] != wpe.dims[1]) {
        throw FormatError("wte / wpe must be matrices with equal width", end_offset);
    }
    c.vocab_size = wte.dims[0];
    c.d_model = wte.dims[1];
    c.max_positions = wpe.dims[0];

    const auto& heads = table.get("meta.n_head");
    if (heads.values.size() != 1 || !(heads.values[0] >= 1.0f) ||
        heads.values[0] != std::floor(heads.values[0])) {
        throw FormatError("meta.n_head must hold one positive integer", end_offset);
    }
    c.n_heads = static_cast<std::size_t>(heads.values[0]);
    while (table.has(layer_name(c.n_layers, "ln_1.g"))) ++c.n_layers;
    try {
        c.validate();
    } catch (const ContractViolation& e) {
        throw FormatError(e.what(), end_offset);
    }

    const std::size_t d = c.d_model;
    auto& w = m.weights;
    w.token_embedding = table.matrix("wte", c.vocab_size, d);
    w.position_embedding = table.matrix("wpe", c.max_positions, d);
    for (std::size_t l = 0; l < c.n_layers; ++l) {
        model::LayerWeights L;
        L.ln1_gamma = table.vec(layer_name(l, "ln_1.g"), d);
        L.ln1_beta = table.vec(layer_name(l, "ln_1.b"), d);
        L.attn_w = table.matrix(layer_name(l, "attn.c_attn.w"), d, 3 * d);
        L.attn_b = table.vec(layer_name(l, "attn.c_attn.b"), 3 * d);
        L.proj_w = table.matrix(layer_name(l, "attn.c_proj.w"), d, d);
        L.proj_b = table.vec(layer_name(l, "attn.c_proj.b"), d);
        L.ln2_gamma = table.vec(layer_name(l, "ln_2.g"), d);
        L.ln2_beta = table.vec(layer_name(l, "ln_2.b"), d);
        L.fc_w = table.matrix(layer_name(l, "mlp.c_fc.w"), d, c.d_mlp());
        L.fc_b = table.vec(layer_name(l, "mlp.c_fc.b"), c.d_mlp());
        L.out_w = table.matrix(layer_name(l, "mlp.c_proj.w"), c.d_mlp(), d);
        L.out_b = table.vec(layer_name(l, "mlp.c_proj.b"), d);
        w.layers.push_back(std::move(L));
    }
    w.lnf_gamma = table.vec("ln_f.g", d);
    w.lnf_beta = table.vec("ln_f.b", d);
    try {
        w.validate(c);
    } catch (const ContractViolation& e) {
        throw FormatError(e.what(), end_offset);
    }
    return m;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("failed reading '" + path.string() + "'");
    return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

model::Model load_model(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    const auto tensors = decode_weights(bytes);
    return model_from_tensors(tensors, bytes.size());
}

void save_model(const std::filesystem::path& path, const model::Model& model) {
    model.weights.validate(model.config);
    write_file(path, encode_weights(model_to_tensors(model)));
}

Dataset load_dataset(const std::filesystem::path& path) { return decode_tokens(read_file(path)); }

void save_dataset(const std::filesystem::path& path, const Dataset& dataset) {
    write_file(path, encode_tokens(dataset));
}

}  // namespace lamp::io
