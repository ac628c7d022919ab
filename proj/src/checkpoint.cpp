#include <bit>
#include <fstream>
#include <iterator>
#include <map>

#include "glhnn/error.hpp"
#include "glhnn/model.hpp"

namespace glhnn {

namespace {

constexpr char kMagic[8] = {'G', 'L', 'H', 'N', 'N', 'C', 'K', 'P'};
constexpr std::uint32_t kMaxName = 1u << 16;
constexpr std::uint64_t kMaxElements = 1ull << 32;

class Writer {
public:
    void bytes(const void* p, std::size_t n) {
        const auto* b = static_cast<const unsigned char*>(p);
        buf_.insert(buf_.end(), b, b + n);
    }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<unsigned char>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<unsigned char>(v >> (8 * i)));
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void str(std::string_view s) {
        u32(static_cast<std::uint32_t>(s.size()));
        bytes(s.data(), s.size());
    }
    std::vector<unsigned char>& buffer() { return buf_; }

private:
    std::vector<unsigned char> buf_;
};

class Reader {
public:
    explicit Reader(std::span<const unsigned char> data) : data_(data) {}

    void need(std::size_t n) const {
        if (data_.size() - pos_ < n) throw IoError("checkpoint is truncated");
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_++]) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data_[pos_++]) << (8 * i);
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string str() {
        const std::uint32_t n = u32();
        if (n > kMaxName) throw IoError("checkpoint string field too long");
        need(n);
        std::string s(reinterpret_cast<const char*>(data_.data() + pos_), n);
        pos_ += n;
        return s;
    }
    std::size_t position() const { return pos_; }
    void skip(std::size_t n) {
        need(n);
        pos_ += n;
    }

private:
    std::span<const unsigned char> data_;
    std::size_t pos_ = 0;
};

}  // namespace

void save_checkpoint(const GlhnnModel& model, const std::filesystem::path& path) {
    Writer w;
    w.bytes(kMagic, sizeof kMagic);
    w.u32(kCheckpointVersion);
    const auto entries = model.config().entries();
    w.u32(static_cast<std::uint32_t>(entries.size()));
    for (const auto& [key, value] : entries) {
        w.str(key);
        w.str(value);
    }
    const auto tensors = model.params().named();
    w.u32(static_cast<std::uint32_t>(tensors.size()));
    for (const auto& [name, t] : tensors) {
        w.str(name);
        w.u32(static_cast<std::uint32_t>(t->rank()));
        for (std::size_t d : t->shape()) w.u64(d);
        for (double v : t->data()) w.f64(v);
    }
    const std::uint64_t checksum = fnv1a64(w.buffer());
    w.u64(checksum);

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open checkpoint for writing: " + path.string());
    out.write(reinterpret_cast<const char*>(w.buffer().data()), static_cast<std::streamsize>(w.buffer().size()));
    if (!out) throw IoError("failed writing checkpoint: " + path.string());
}

GlhnnModel load_checkpoint(const std::filesystem::path& path, std::size_t expected_vocab_size) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint: " + path.string());
    const std::vector<unsigned char> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    if (data.size() < sizeof kMagic + 4 + 8 || !std::equal(std::begin(kMagic), std::end(kMagic), data.begin())) {
        throw IoError("not a checkpoint file (bad magic or truncated): " + path.string());
    }
    Reader r(data);
    r.skip(sizeof kMagic);
    const std::uint32_t version = r.u32();
    if (version != kCheckpointVersion) {
        throw ConfigError("checkpoint format version " + std::to_string(version) + " is not supported (expected " +
                          std::to_string(kCheckpointVersion) + ")");
    }

    const std::span<const unsigned char> body(data.data(), data.size() - 8);
    Reader tail(std::span<const unsigned char>(data.data() + data.size() - 8, 8));
    if (fnv1a64(body) != tail.u64()) throw IoError("checkpoint checksum mismatch (truncated or corrupt)");

    ModelConfig config;
    const std::uint32_t n_config = r.u32();
    for (std::uint32_t i = 0; i < n_config; ++i) {
        const std::string key = r.str();
        const std::string value = r.str();
        config.set(key, value);
    }
    if (config.vocab_size != expected_vocab_size) {
        throw ConfigError("checkpoint vocabulary size " + std::to_string(config.vocab_size) +
                          " does not match expected " + std::to_string(expected_vocab_size));
    }

    std::map<std::string, Tensor> loaded;
    const std::uint32_t n_tensors = r.u32();
    for (std::uint32_t i = 0; i < n_tensors; ++i) {
        const std::string name = r.str();
        const std::uint32_t rank = r.u32();
        if (rank == 0 || rank > 3) throw IoError("checkpoint tensor '" + name + "' has invalid rank");
        std::vector<std::size_t> shape(rank);
        std::uint64_t count = 1;
        for (auto& d : shape) {
            d = r.u64();
            count *= d;
            if (d == 0 || count > kMaxElements) throw IoError("checkpoint tensor '" + name + "' has invalid shape");
        }
        r.need(count * 8);
        std::vector<double> values(count);
        for (auto& v : values) v = r.f64();
        loaded.emplace(name, Tensor(std::move(shape), std::move(values)));
    }
    if (r.position() != body.size()) throw IoError("checkpoint has trailing bytes");

    ModelParams params;
    auto take = [&](const char* name, Tensor& dst) {
        auto it = loaded.find(name);
        if (it != loaded.end()) {
            dst = std::move(it->second);
            loaded.erase(it);
        }
    };
    take("embedding", params.embedding);
    take("gcnn.w", params.gcnn.w);
    take("gcnn.v", params.gcnn.v);
    take("gcnn.b", params.gcnn.b);
    take("gcnn.d", params.gcnn.d);
    take("lstm.w", params.lstm.w);
    take("lstm.bias", params.lstm.bias);
    take("dense.w", params.dense.w);
    take("dense.b", params.dense.b);
    if (!loaded.empty()) throw IoError("checkpoint contains unknown tensor '" + loaded.begin()->first + "'");
    return GlhnnModel(config, std::move(params));
}

}  // namespace glhnn
