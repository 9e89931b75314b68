#include "correct/autodiff/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>

namespace correct::ad {

namespace {

constexpr const char* kFormat = "correct-checkpoint";

void put_le64(std::string& out, Real v) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &v, sizeof bits);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

Real get_le64(const unsigned char* p) {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    Real v = 0.0;
    std::memcpy(&v, &bits, sizeof v);
    return v;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ParameterStore& params,
                     const nlohmann::json& meta) {
    nlohmann::json manifest;
    manifest["format"] = kFormat;
    manifest["version"] = 1;
    manifest["meta"] = meta;
    manifest["tensors"] = nlohmann::json::array();

    std::string blob;
    for (const auto& [name, p] : params) {
        const std::size_t offset = blob.size();
        for (Real v : p.value.data()) put_le64(blob, v);
        manifest["tensors"].push_back({{"name", name},
                                       {"shape", {p.value.rows(), p.value.cols()}},
                                       {"dtype", "f64"},
                                       {"offset", offset},
                                       {"bytes", blob.size() - offset}});
    }

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path.string());
    out << manifest.dump() << '\n';
    out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    if (!out) throw std::runtime_error("failed writing checkpoint: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path.string());
    std::string header;
    std::getline(in, header);
    const std::string blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    const auto manifest = nlohmann::json::parse(header);
    if (manifest.value("format", "") != kFormat) {
        throw std::runtime_error("not a checkpoint archive: " + path.string());
    }

    Checkpoint ck;
    ck.meta = manifest.value("meta", nlohmann::json::object());
    const auto* base = reinterpret_cast<const unsigned char*>(blob.data());
    for (const auto& entry : manifest.at("tensors")) {
        const auto name = entry.at("name").get<std::string>();
        if (entry.at("dtype").get<std::string>() != "f64") {
            throw std::runtime_error("unsupported dtype for " + name);
        }
        const auto rows = entry.at("shape").at(0).get<std::size_t>();
        const auto cols = entry.at("shape").at(1).get<std::size_t>();
        const auto offset = entry.at("offset").get<std::size_t>();
        const auto bytes = entry.at("bytes").get<std::size_t>();
        if (bytes != rows * cols * 8 || offset + bytes > blob.size()) {
            throw std::runtime_error("corrupt checkpoint entry: " + name);
        }
        Tensor t(rows, cols);
        for (std::size_t i = 0; i < t.size(); ++i) t[i] = get_le64(base + offset + 8 * i);
        ck.params.add(name, std::move(t));
    }
    return ck;
}

}  // namespace correct::ad
