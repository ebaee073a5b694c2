#include "fewscale/embedding_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

#include <json.hpp>

#include "fewscale/errors.hpp"

namespace fewscale {
namespace {

class ByteWriter {
public:
    explicit ByteWriter(std::vector<std::byte>& out) : out_(out) {}

    void put_u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xFF));
    }
    void put_u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xFF));
    }
    void put_f32(float v) { put_u32(std::bit_cast<std::uint32_t>(v)); }
    void put_bytes(const void* data, std::size_t n) {
        const auto* p = static_cast<const std::byte*>(data);
        out_.insert(out_.end(), p, p + n);
    }

private:
    std::vector<std::byte>& out_;
};

class ByteReader {
public:
    explicit ByteReader(std::span<const std::byte> in) : in_(in) {}

    std::uint32_t u32() {
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= std::uint32_t(std::to_integer<std::uint8_t>(in_[pos_ + i])) << (8 * i);
        pos_ += 4;
        return v;
    }
    std::uint64_t u64() {
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= std::uint64_t(std::to_integer<std::uint8_t>(in_[pos_ + i])) << (8 * i);
        pos_ += 8;
        return v;
    }
    float f32() { return std::bit_cast<float>(u32()); }
    std::span<const std::byte> take(std::size_t n) {
        auto s = in_.subspan(pos_, n);
        pos_ += n;
        return s;
    }
    std::size_t remaining() const { return in_.size() - pos_; }

private:
    std::span<const std::byte> in_;
    std::size_t pos_ = 0;
};

std::string encode_meta(const DatasetMeta& meta) {
    nlohmann::ordered_json j;
    j["dataset"] = meta.dataset;
    j["model"] = meta.model;
    j["checkpoint"] = meta.checkpoint;
    return j.dump();
}

DatasetMeta decode_meta(std::span<const std::byte> bytes) {
    std::string text(reinterpret_cast<const char*>(bytes.data()), bytes.size());
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw FormatError("embedding metadata is not a JSON object");
    DatasetMeta meta;
    auto field = [&](const char* name, std::string& out) {
        if (!j.contains(name)) return;
        if (!j[name].is_string()) throw FormatError(std::string("metadata field '") + name + "' is not a string");
        out = j[name].get<std::string>();
    };
    field("dataset", meta.dataset);
    field("model", meta.model);
    field("checkpoint", meta.checkpoint);
    return meta;
}

} // namespace

std::vector<std::byte> encode_embeddings(const EmbeddingDataset& dataset) {
    const std::string meta = encode_meta(dataset.meta());
    std::vector<std::byte> out;
    out.reserve(kFixedHeaderBytes + meta.size() + dataset.size() * record_bytes(dataset.dim()));
    ByteWriter w(out);
    w.put_bytes(kEmbeddingMagic, 4);
    w.put_u32(kEmbeddingVersion);
    w.put_u32(dataset.dim());
    w.put_u64(dataset.size());
    w.put_u32(static_cast<std::uint32_t>(meta.size()));
    w.put_bytes(meta.data(), meta.size());
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        w.put_u64(dataset.key(i).sample_id);
        w.put_u32(dataset.key(i).class_id);
        for (float v : dataset.vector(i)) w.put_f32(v);
    }
    return out;
}

EmbeddingDataset decode_embeddings(std::span<const std::byte> bytes) {
    if (bytes.size() < kFixedHeaderBytes) {
        throw FormatError("embedding file shorter than its " + std::to_string(kFixedHeaderBytes) +
                          "-byte header");
    }
    if (std::memcmp(bytes.data(), kEmbeddingMagic, 4) != 0) throw FormatError("bad magic, expected EMBD");
    ByteReader r(bytes.subspan(4));
    const std::uint32_t version = r.u32();
    if (version != kEmbeddingVersion) {
        throw FormatError("unsupported embedding format version " + std::to_string(version));
    }
    const std::uint32_t dim = r.u32();
    const std::uint64_t count = r.u64();
    const std::uint32_t meta_len = r.u32();
    if (dim == 0) throw FormatError("embedding dim is zero");

    const std::size_t payload = r.remaining();
    const std::size_t rec = record_bytes(dim);
    if (meta_len > payload || count > (payload - meta_len) / rec ||
        payload - meta_len != count * rec) {
        const std::size_t expected = kFixedHeaderBytes + meta_len + count * rec;
        throw CorruptionError("embedding file length mismatch: expected " + std::to_string(expected) +
                              " bytes, got " + std::to_string(bytes.size()));
    }
    DatasetMeta meta = decode_meta(r.take(meta_len));

    std::vector<RecordKey> keys(count);
    std::vector<float> values(count * dim);
    for (std::size_t i = 0; i < count; ++i) {
        keys[i].sample_id = r.u64();
        keys[i].class_id = r.u32();
        for (std::size_t d = 0; d < dim; ++d) {
            const float v = r.f32();
            if (!std::isfinite(v)) {
                throw ValidationError("non-finite component " + std::to_string(d) + " in record " +
                                      std::to_string(i));
            }
            values[i * dim + d] = v;
        }
    }
    return EmbeddingDataset(dim, std::move(keys), std::move(values), std::move(meta));
}

void write_embeddings(const EmbeddingDataset& dataset, const std::filesystem::path& path) {
    const auto bytes = encode_embeddings(dataset);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for " + path.string());
}

EmbeddingDataset read_embeddings(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("read failed for " + path.string());
    return decode_embeddings(std::as_bytes(std::span<const char>(raw)));
}

} // namespace fewscale
