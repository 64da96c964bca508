// Copyright (C) 2026 The lunar-lab Authors
// SPDX-License-Identifier: Apache-2.0
//

#include <zlib.h>

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "lunar/errors.hpp"
#include "lunar/model.hpp"

namespace lunar {

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

constexpr std::array<char, 4> kMagic{'L', 'N', 'R', 'M'};

class Writer {
  public:
    template <class T>
    void put(T v) {
        const auto* p = reinterpret_cast<const char*>(&v);
        buf_.insert(buf_.end(), p, p + sizeof(T));
    }
    void bytes(const void* p, std::size_t n) {
        const auto* c = static_cast<const char*>(p);
        buf_.insert(buf_.end(), c, c + n);
    }
    std::vector<char>& buffer() { return buf_; }

  private:
    std::vector<char> buf_;
};

class Reader {
  public:
    Reader(const std::vector<char>& buf, std::size_t end, std::string path) : buf_(buf), end_(end), path_(std::move(path)) {}

    template <class T>
    T get() {
        T v{};
        need(sizeof(T));
        std::memcpy(&v, buf_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }
    void bytes(void* out, std::size_t n) {
        need(n);
        std::memcpy(out, buf_.data() + pos_, n);
        pos_ += n;
    }
    bool done() const { return pos_ == end_; }

  private:
    void need(std::size_t n) const {
        if (end_ - pos_ < n) {
            throw FormatError(path_ + ": truncated checkpoint");
        }
    }
    const std::vector<char>& buf_;
    std::size_t end_;
    std::size_t pos_ = 0;
    std::string path_;
};

std::uint32_t crc_of(const char* p, std::size_t n) {
    uLong c = crc32(0L, Z_NULL, 0);
    c = crc32(c, reinterpret_cast<const Bytef*>(p), static_cast<uInt>(n));
    return static_cast<std::uint32_t>(c);
}

}  // namespace

void save_checkpoint(const ModelCheckpoint& m, const std::filesystem::path& path) {
    Writer w;
    w.bytes(kMagic.data(), kMagic.size());
    w.put<std::uint32_t>(kCheckpointVersion);
    const ModelConfig& c = m.config;
    for (std::uint32_t v : {c.d_model, c.n_layers, c.n_heads, c.d_mlp, c.vocab_size, c.max_seq_len, c.seed}) {
        w.put<std::uint32_t>(v);
    }
    for (const auto& t : tensors(m)) {
        w.put<std::uint16_t>(static_cast<std::uint16_t>(t.name.size()));
        w.bytes(t.name.data(), t.name.size());
        w.put<std::uint8_t>(static_cast<std::uint8_t>(t.dims.size()));
        for (std::uint32_t d : t.dims) {
            w.put<std::uint32_t>(d);
        }
        w.bytes(t.values.data(), t.values.size_bytes());
    }
    auto& buf = w.buffer();
    w.put<std::uint32_t>(crc_of(buf.data(), buf.size()));

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) {
        throw IoError("write failed: " + path.string());
    }
}

ModelCheckpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    const std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const std::string name = path.string();
    if (buf.size() < kMagic.size() || std::memcmp(buf.data(), kMagic.data(), kMagic.size()) != 0) {
        throw FormatError(name + ": bad magic, not a checkpoint");
    }
    if (buf.size() < 8) {
        throw FormatError(name + ": truncated checkpoint");
    }
    std::uint32_t version = 0;
    std::memcpy(&version, buf.data() + 4, 4);
    if (version != kCheckpointVersion) {
        throw FormatError(name + ": unsupported checkpoint version " + std::to_string(version));
    }
    if (buf.size() < 8 + 7 * 4 + 4) {
        throw FormatError(name + ": truncated checkpoint");
    }
    const std::size_t body = buf.size() - 4;

    Reader r(buf, body, name);
    r.get<std::uint32_t>();
    r.get<std::uint32_t>();
    ModelConfig cfg;
    cfg.d_model = r.get<std::uint32_t>();
    cfg.n_layers = r.get<std::uint32_t>();
    cfg.n_heads = r.get<std::uint32_t>();
    cfg.d_mlp = r.get<std::uint32_t>();
    cfg.vocab_size = r.get<std::uint32_t>();
    cfg.max_seq_len = r.get<std::uint32_t>();
    cfg.seed = r.get<std::uint32_t>();
    try {
        cfg.validate();
    } catch (const ConfigError& e) {
        throw FormatError(name + ": " + e.what());
    }

    // Shape the result from the config, then fill it tensor by tensor.
    ModelCheckpoint m;
    m.config = cfg;
    m.token_embedding = Matrix(cfg.vocab_size, cfg.d_model);
    m.layers.resize(cfg.n_layers);
    for (auto& w : m.layers) {
        w.attn_norm.assign(cfg.d_model, 0.0f);
        w.mlp_norm.assign(cfg.d_model, 0.0f);
        w.wq = Matrix(cfg.d_model, cfg.d_model);
        w.wk = Matrix(cfg.d_model, cfg.d_model);
        w.wv = Matrix(cfg.d_model, cfg.d_model);
        w.wo = Matrix(cfg.d_model, cfg.d_model);
        w.up = Matrix(cfg.d_model, cfg.d_mlp);
        w.down = Matrix(cfg.d_mlp, cfg.d_model);
    }
    m.final_norm.assign(cfg.d_model, 0.0f);
    m.unembedding = Matrix(cfg.vocab_size, cfg.d_model);

    for (auto& t : tensors(m)) {
        const auto len = r.get<std::uint16_t>();
        std::string tname(len, '\0');
        r.bytes(tname.data(), len);
        if (tname != t.name) {
            throw FormatError(name + ": expected tensor " + t.name + ", found " + tname);
        }
        const auto rank = r.get<std::uint8_t>();
        std::vector<std::uint32_t> dims(rank);
        for (auto& d : dims) {
            d = r.get<std::uint32_t>();
        }
        if (dims != t.dims) {
            throw FormatError(name + ": tensor " + t.name + " has unexpected shape");
        }
        r.bytes(t.values.data(), t.values.size_bytes());
    }
    if (!r.done()) {
        throw FormatError(name + ": trailing bytes after tensor table");
    }
    std::uint32_t stored = 0;
    std::memcpy(&stored, buf.data() + body, 4);
    if (stored != crc_of(buf.data(), body)) {
        throw FormatError(name + ": checksum mismatch");
    }
    return m;
}

}  // namespace lunar
