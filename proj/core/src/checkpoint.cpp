#include "fluhost/checkpoint.hpp"

#include "fluhost/bytes.hpp"
#include "fluhost/error.hpp"

namespace fluhost::checkpoint {

namespace {
constexpr std::string_view kMagic = "FLUHMODL";
constexpr std::uint32_t kVersion = 1;
}  // namespace

std::string pack(const Container& c) {
    ByteWriter w;
    w.raw(kMagic);
    w.u32(kVersion);
    const std::string header = c.header.dump();
    w.u64(header.size());
    w.raw(header);
    w.u64(c.values.size());
    for (double v : c.values) w.f64(v);
    return w.take();
}

Container unpack(std::string_view bytes) {
    ByteReader r(bytes);
    if (bytes.size() < kMagic.size() || r.raw(kMagic.size()) != kMagic) throw DataError("not a fluhost model file");
    const auto version = r.u32();
    if (version != kVersion) throw DataError("unsupported model file version " + std::to_string(version));
    Container c;
    const auto hlen = r.u64();
    if (hlen > r.remaining()) throw DataError("truncated binary data");
    try {
        c.header = nlohmann::json::parse(r.raw(static_cast<std::size_t>(hlen)));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("corrupt model header: ") + e.what());
    }
    const auto n = r.u64();
    if (n > r.remaining() / 8) throw DataError("truncated binary data");
    c.values.resize(static_cast<std::size_t>(n));
    for (auto& v : c.values) v = r.f64();
    if (!r.done()) throw DataError("trailing bytes after model data");
    return c;
}

nlohmann::json save_network(const nn::Network& net, std::vector<double>& values) {
    nlohmann::json params = nlohmann::json::array();
    for (const auto& p : net.params()) {
        const auto& t = p.var.value();
        params.push_back({{"name", p.name}, {"shape", t.shape()}});
        values.insert(values.end(), t.values().begin(), t.values().end());
    }
    return {{"spec", net.spec().to_json()}, {"params", params}};
}

nn::Network load_network(const nlohmann::json& j, std::span<const double> values, std::size_t& offset) {
    nn::Network net(nn::ModelSpec::from_json(j.at("spec")), 0);
    const auto& jp = j.at("params");
    if (jp.size() != net.params().size())
        throw DataError("model file has " + std::to_string(jp.size()) + " parameters, network needs " +
                        std::to_string(net.params().size()));
    for (std::size_t i = 0; i < jp.size(); ++i) {
        auto& p = net.params()[i];
        if (jp[i].at("name").get<std::string>() != p.name ||
            jp[i].at("shape").get<nn::Shape>() != p.var.value().shape())
            throw DataError("parameter '" + p.name + "' does not match the model file");
        auto dst = p.var.mutable_value().values();
        if (values.size() - offset < dst.size()) throw DataError("truncated binary data");
        std::copy(values.begin() + static_cast<std::ptrdiff_t>(offset),
                  values.begin() + static_cast<std::ptrdiff_t>(offset + dst.size()), dst.begin());
        offset += dst.size();
    }
    return net;
}

}  // namespace fluhost::checkpoint
