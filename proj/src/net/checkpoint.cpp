#include "cpn/net/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace cpn::net {
namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint writer assumes a little-endian host");

constexpr uint32_t kMagic = 0x544E5043;  // "CPNT"
constexpr uint32_t kVersion = 1;

void put_u32(std::string& out, uint32_t v) {
    out.append(reinterpret_cast<const char*>(&v), 4);
}

void put_u64(std::string& out, uint64_t v) {
    out.append(reinterpret_cast<const char*>(&v), 8);
}

void put_str(std::string& out, const std::string& s) {
    put_u32(out, static_cast<uint32_t>(s.size()));
    out += s;
}

void put_tensor(std::string& out, const std::string& name, const Tensor& t) {
    put_str(out, name);
    put_u32(out, static_cast<uint32_t>(t.rows));
    put_u32(out, static_cast<uint32_t>(t.cols));
    for (double v : t.data) {
        const float f = static_cast<float>(v);
        out.append(reinterpret_cast<const char*>(&f), 4);
    }
}

class Reader {
public:
    explicit Reader(std::string bytes) : bytes_(std::move(bytes)) {}

    uint32_t u32() {
        need(4);
        uint32_t v;
        std::memcpy(&v, bytes_.data() + pos_, 4);
        pos_ += 4;
        return v;
    }

    uint64_t u64() {
        need(8);
        uint64_t v;
        std::memcpy(&v, bytes_.data() + pos_, 8);
        pos_ += 8;
        return v;
    }

    std::string str() {
        const uint32_t len = u32();
        need(len);
        std::string s = bytes_.substr(pos_, len);
        pos_ += len;
        return s;
    }

    Tensor tensor(int rows, int cols) {
        Tensor t(rows, cols);
        need(t.data.size() * 4);
        for (double& v : t.data) {
            float f;
            std::memcpy(&f, bytes_.data() + pos_, 4);
            pos_ += 4;
            v = static_cast<double>(f);
        }
        return t;
    }

    bool at_end() const { return pos_ == bytes_.size(); }

private:
    void need(size_t n) {
        if (pos_ + n > bytes_.size())
            throw TruncatedCheckpoint("checkpoint truncated at byte " +
                                      std::to_string(pos_));
    }
    std::string bytes_;
    size_t pos_ = 0;
};

std::string serialize(Classifier& model, int epoch, long long adam_t) {
    std::string out;
    put_u32(out, kMagic);
    put_u32(out, kVersion);
    put_str(out, model.config().serialize());
    put_u32(out, static_cast<uint32_t>(epoch));
    put_u64(out, static_cast<uint64_t>(adam_t));

    const std::vector<nn::Param*> params = model.params();
    const auto state = model.state_tensors();
    put_u32(out, static_cast<uint32_t>(params.size() * 3 + state.size()));
    for (nn::Param* p : params) {
        put_tensor(out, p->name, p->value);
        put_tensor(out, "adam.m." + p->name, p->m);
        put_tensor(out, "adam.v." + p->name, p->v);
    }
    for (const auto& [name, t] : state) put_tensor(out, name, *t);
    return out;
}

} // namespace

void checkpoint_save(const std::string& path, Classifier& model, int epoch,
                     long long adam_t) {
    const std::string bytes = serialize(model, epoch, adam_t);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + path);
}

LoadedModel checkpoint_load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    Reader r(ss.str());

    if (r.u32() != kMagic) throw FormatError("checkpoint: bad magic");
    const uint32_t version = r.u32();
    if (version != kVersion)
        throw FormatError("checkpoint: unsupported version " + std::to_string(version));

    LoadedModel lm;
    const NetworkConfig cfg = NetworkConfig::parse(r.str());
    lm.epoch = static_cast<int>(r.u32());
    lm.adam_t = static_cast<long long>(r.u64());
    lm.model = std::make_unique<Classifier>(cfg);

    std::vector<std::pair<std::string, Tensor*>> slots;
    for (nn::Param* p : lm.model->params()) {
        slots.emplace_back(p->name, &p->value);
        slots.emplace_back("adam.m." + p->name, &p->m);
        slots.emplace_back("adam.v." + p->name, &p->v);
    }
    for (const auto& [name, t] : lm.model->state_tensors())
        slots.emplace_back(name, t);

    const uint32_t count = r.u32();
    if (count != slots.size())
        throw FormatError("checkpoint: expected " + std::to_string(slots.size()) +
                          " tensors, found " + std::to_string(count));
    for (uint32_t i = 0; i < count; ++i) {
        const std::string name = r.str();
        const auto rows = static_cast<int>(r.u32());
        const auto cols = static_cast<int>(r.u32());
        if (name != slots[i].first)
            throw FormatError("checkpoint: tensor '" + name + "' out of order");
        Tensor* dst = slots[i].second;
        if (rows != dst->rows || cols != dst->cols)
            throw FormatError("checkpoint: shape mismatch for '" + name + "'");
        if (rows < 0 || cols < 0 ||
            static_cast<long long>(rows) * cols > 100'000'000)
            throw FormatError("checkpoint: unreasonable tensor shape");
        *dst = r.tensor(rows, cols);
    }
    if (!r.at_end()) throw FormatError("checkpoint: trailing bytes");
    return lm;
}

} // namespace cpn::net
