#include "regnn/checkpoint.hpp"

#include <cstdint>
#include <fstream>

#include "regnn/textgraph.hpp"

namespace regnn {

namespace {
constexpr char kMagic[] = "REGNN1";
constexpr std::size_t kMagicLen = 6;
}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    nlohmann::json header = ckpt.header;
    nlohmann::json plist = nlohmann::json::array();
    for (std::size_t i = 0; i < ckpt.params.names.size(); ++i) {
        const auto& t = ckpt.params.values[i];
        plist.push_back({{"name", ckpt.params.names[i]}, {"rows", t.rows}, {"cols", t.cols}});
    }
    header["params"] = std::move(plist);
    std::string body = header.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write checkpoint: " + path);
    out.write(kMagic, kMagicLen);
    std::uint64_t len = body.size();
    unsigned char lenbuf[8];
    for (int i = 0; i < 8; ++i) lenbuf[i] = static_cast<unsigned char>((len >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(lenbuf), 8);
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
    for (const auto& t : ckpt.params.values)
        out.write(reinterpret_cast<const char*>(t.v.data()),
                  static_cast<std::streamsize>(t.v.size() * sizeof(float)));
    if (!out) throw IoError("short write on checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint: " + path);
    char magic[kMagicLen];
    in.read(magic, kMagicLen);
    if (!in || std::string(magic, kMagicLen) != kMagic)
        throw IoError(path + " is not a REGNN1 checkpoint");
    unsigned char lenbuf[8];
    in.read(reinterpret_cast<char*>(lenbuf), 8);
    std::uint64_t len = 0;
    for (int i = 0; i < 8; ++i) len |= static_cast<std::uint64_t>(lenbuf[i]) << (8 * i);
    std::string body(len, '\0');
    in.read(body.data(), static_cast<std::streamsize>(len));
    if (!in) throw IoError("truncated checkpoint header: " + path);

    Checkpoint ckpt;
    ckpt.header = nlohmann::json::parse(body);
    for (const auto& p : ckpt.header.at("params")) {
        int rows = p.at("rows").get<int>();
        int cols = p.at("cols").get<int>();
        Tensor<float> t(rows, cols);
        in.read(reinterpret_cast<char*>(t.v.data()),
                static_cast<std::streamsize>(t.v.size() * sizeof(float)));
        if (!in) throw IoError("truncated checkpoint tensors: " + path);
        ckpt.params.add(p.at("name").get<std::string>(), std::move(t));
    }
    return ckpt;
}

}  // namespace regnn
