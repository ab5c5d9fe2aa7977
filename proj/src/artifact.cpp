#include "randnn/artifact.hpp"

#include <zlib.h>

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace randnn::artifact {

namespace {

constexpr char kMagic[4] = {'R', 'N', 'N', 'M'};

void put_u8(std::string& out, std::uint8_t v) { out.push_back(static_cast<char>(v)); }

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    put_u64(out, bits);
}

void put_string(std::string& out, const std::string& s) {
    put_u64(out, s.size());
    out += s;
}

void put_matrix(std::string& out, const Matrix& m) {
    put_u64(out, static_cast<std::uint64_t>(m.rows()));
    put_u64(out, static_cast<std::uint64_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) put_f64(out, m(i, j));
}

struct Reader {
    const std::string& bytes;
    std::size_t at = 0;
    const std::string& origin;

    void need(std::size_t n) const {
        if (at + n > bytes.size()) throw std::runtime_error(origin + ": truncated model file");
    }
    std::uint8_t u8() {
        need(1);
        return static_cast<std::uint8_t>(bytes[at++]);
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(bytes[at++])) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(bytes[at++])) << (8 * i);
        return v;
    }
    double f64() {
        const std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, sizeof(v));
        return v;
    }
    std::string str() {
        const std::uint64_t n = u64();
        need(n);
        std::string s = bytes.substr(at, n);
        at += n;
        return s;
    }
    Matrix matrix() {
        const auto rows = static_cast<Eigen::Index>(u64());
        const auto cols = static_cast<Eigen::Index>(u64());
        if (rows < 0 || cols < 0 || (rows > 0 && cols > static_cast<Eigen::Index>(1) << 32)) {
            throw std::runtime_error(origin + ": bad matrix block");
        }
        Matrix m(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = f64();
        return m;
    }
};

std::uint32_t checksum(const std::string& bytes) {
    return static_cast<std::uint32_t>(
        crc32(0L, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size())));
}

}  // namespace

std::string serialize_model(const ModelArtifact& a) {
    std::string out;
    out.append(kMagic, 4);
    put_u32(out, kFormatVersion);
    put_string(out, config::resolved_text(a.config));
    put_u8(out, a.weights_materialized ? 1 : 0);
    put_u32(out, static_cast<std::uint32_t>(a.weights.size()));
    for (const auto& [name, m] : a.weights) {
        put_string(out, name);
        put_matrix(out, m);
    }
    put_u8(out, a.readout.has_value() ? 1 : 0);
    if (a.readout) {
        put_matrix(out, a.readout->beta);
        put_f64(out, a.readout->lambda);
        put_u8(out, static_cast<std::uint8_t>(a.readout->loss));
        put_u8(out, a.readout->converged ? 1 : 0);
        put_u32(out, static_cast<std::uint32_t>(a.readout->iterations));
        put_u32(out, static_cast<std::uint32_t>(a.readout->sparsity));
    }
    put_u32(out, checksum(out));
    return out;
}

ModelArtifact deserialize_model(const std::string& bytes, const std::string& origin) {
    if (bytes.size() < 8 + 4) throw std::runtime_error(origin + ": not a model file");
    if (std::memcmp(bytes.data(), kMagic, 4) != 0) {
        throw std::runtime_error(origin + ": bad magic header, not a model file");
    }
    const std::string body = bytes.substr(0, bytes.size() - 4);
    Reader tail{bytes, bytes.size() - 4, origin};
    if (tail.u32() != checksum(body)) {
        throw std::runtime_error(origin + ": checksum mismatch, the file is corrupted");
    }

    Reader r{bytes, 4, origin};
    const std::uint32_t version = r.u32();
    if (version != kFormatVersion) {
        throw std::runtime_error(origin + ": unsupported model format version " + std::to_string(version));
    }

    ModelArtifact a;
    a.config = config::parse_config_text(r.str(), origin + " (embedded config)");
    a.weights_materialized = r.u8() != 0;
    const std::uint32_t blocks = r.u32();
    for (std::uint32_t i = 0; i < blocks; ++i) {
        std::string name = r.str();
        Matrix m = r.matrix();
        a.weights.emplace_back(std::move(name), std::move(m));
    }
    if (r.u8() != 0) {
        rvfl::Readout ro;
        ro.beta = r.matrix();
        ro.lambda = r.f64();
        ro.loss = static_cast<rvfl::LossKind>(r.u8());
        ro.converged = r.u8() != 0;
        ro.iterations = static_cast<int>(r.u32());
        ro.sparsity = static_cast<int>(r.u32());
        a.readout = std::move(ro);
    }
    return a;
}

void save_model(const std::string& path, const ModelArtifact& artifact) {
    const std::string bytes = serialize_model(artifact);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("failed to write model file '" + path + "'");
}

ModelArtifact load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open model file '" + path + "'");
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize_model(bytes, path);
}

}  // namespace randnn::artifact
