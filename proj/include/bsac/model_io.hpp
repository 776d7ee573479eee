#pragma once

#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "bsac/ensemble.hpp"

namespace bsac {

inline constexpr int kArchiveFormatVersion = 1;

namespace detail {

inline nlohmann::json layer_to_json(const DenseLayer& layer) {
    nlohmann::json j;
    j["fan_in"] = layer.fan_in();
    j["fan_out"] = layer.fan_out();
    j["activation"] = layer.activation == Activation::Relu      ? "relu"
                      : layer.activation == Activation::Sigmoid ? "sigmoid"
                                                                : "linear";
    j["weights"] = layer.weights.values();  // row-major
    j["bias"] = layer.bias;
    return j;
}

inline DenseLayer layer_from_json(const nlohmann::json& j) {
    const std::string act = j.at("activation");
    DenseLayer layer = make_layer(j.at("fan_in"), j.at("fan_out"),
                                  act == "relu"      ? Activation::Relu
                                  : act == "sigmoid" ? Activation::Sigmoid
                                                     : Activation::Linear);
    const std::vector<double> weights = j.at("weights");
    if (weights.size() != layer.weights.size()) {
        throw std::runtime_error("model archive: weight count mismatch");
    }
    layer.weights.values() = weights;
    layer.bias = j.at("bias").get<Vector>();
    if (layer.bias.size() != layer.fan_out()) {
        throw std::runtime_error("model archive: bias length mismatch");
    }
    return layer;
}

inline nlohmann::json network_to_json(const Network& net) {
    nlohmann::json arr = nlohmann::json::array();
    for (const DenseLayer& layer : net) arr.push_back(layer_to_json(layer));
    return arr;
}

inline Network network_from_json(const nlohmann::json& arr) {
    Network net;
    for (const auto& j : arr) net.push_back(layer_from_json(j));
    return net;
}

inline nlohmann::json preprocess_to_json(const PreprocessParams& params) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : params.columns) {
        nlohmann::json j;
        j["name"] = c.name;
        j["role"] = c.role == ColumnRole::Continuous ? "continuous" : "categorical";
        if (c.role == ColumnRole::Continuous) {
            j["min"] = c.min;
            j["max"] = c.max;
        } else {
            j["categories"] = c.categories;
        }
        arr.push_back(j);
    }
    return arr;
}

inline PreprocessParams preprocess_from_json(const nlohmann::json& arr) {
    PreprocessParams params;
    for (const auto& j : arr) {
        PreprocessParams::Column c;
        c.name = j.at("name");
        if (j.at("role") == "continuous") {
            c.role = ColumnRole::Continuous;
            c.min = j.at("min");
            c.max = j.at("max");
        } else {
            c.role = ColumnRole::Categorical;
            c.categories = j.at("categories").get<std::vector<std::string>>();
        }
        params.columns.push_back(std::move(c));
    }
    return params;
}

inline std::string utc_timestamp() {
    std::time_t now = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    return buf;
}

}  // namespace detail

/// FNV-1a over the feature matrix and labels; stored in archives so a model
/// can be traced back to the exact prepared dataset.
inline std::string dataset_fingerprint(const Dataset& ds) {
    std::uint64_t hash = 0xCBF29CE484222325ULL;
    auto mix_bytes = [&hash](const void* data, std::size_t len) {
        const auto* bytes = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < len; ++i) {
            hash ^= bytes[i];
            hash *= 0x100000001B3ULL;
        }
    };
    const std::size_t dims[2] = {ds.features.rows(), ds.features.cols()};
    mix_bytes(dims, sizeof(dims));
    mix_bytes(ds.features.data(), ds.features.size() * sizeof(double));
    mix_bytes(ds.labels.data(), ds.labels.size() * sizeof(double));
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

/// Writes content to a temporary file in the target directory, then renames.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error("cannot write '" + tmp.string() + "'");
        }
        out << content;
    }
    std::filesystem::rename(tmp, path);
}

/// Self-describing model archive. Weights round-trip bit-exactly (JSON doubles
/// are emitted with shortest-exact decimal text).
struct ModelArchive {
    BSACModel model;
    std::string dataset_kind;
    nlohmann::json run_config;  // snapshot of the invoking configuration
    std::string fingerprint;
    std::string created;
};

inline void save_model(const ModelArchive& archive, const std::filesystem::path& path) {
    nlohmann::json j;
    j["format_version"] = kArchiveFormatVersion;
    j["kind"] = "bsac-model";
    j["dataset"] = archive.dataset_kind;
    j["metadata"] = {{"seed", archive.model.metadata.seed},
                     {"fold", archive.model.metadata.fold},
                     {"dataset_fingerprint", archive.fingerprint},
                     {"created", archive.created.empty() ? detail::utc_timestamp()
                                                         : archive.created}};
    j["run_config"] = archive.run_config;
    j["preprocess"] = detail::preprocess_to_json(archive.model.preprocess);

    nlohmann::json models = nlohmann::json::array();
    for (std::size_t i = 0; i < archive.model.base_models.size(); ++i) {
        const SAModel& m = archive.model.base_models[i];
        nlohmann::json mj;
        mj["gamma"] = archive.model.gammas[i];
        mj["encoder"] = detail::network_to_json(m.encoder);
        mj["decoder"] = detail::network_to_json(m.decoder);
        mj["classifier_head"] = detail::network_to_json(m.classifier_head);
        models.push_back(mj);
    }
    j["base_models"] = models;
    atomic_write(path, j.dump(1));
}

inline ModelArchive load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open model archive '" + path.string() + "'");
    }
    nlohmann::json j;
    in >> j;
    const int version = j.at("format_version");
    if (version != kArchiveFormatVersion) {
        throw std::runtime_error("model archive '" + path.string() + "' has format version " +
                                 std::to_string(version) + ", this build reads version " +
                                 std::to_string(kArchiveFormatVersion));
    }
    ModelArchive archive;
    archive.dataset_kind = j.value("dataset", "generic");
    archive.run_config = j.value("run_config", nlohmann::json::object());
    archive.fingerprint = j.at("metadata").value("dataset_fingerprint", "");
    archive.created = j.at("metadata").value("created", "");
    archive.model.metadata.seed = j.at("metadata").value("seed", 0ULL);
    archive.model.metadata.fold = j.at("metadata").value("fold", -1);
    archive.model.metadata.dataset = archive.dataset_kind;
    archive.model.preprocess = detail::preprocess_from_json(j.at("preprocess"));
    for (const auto& mj : j.at("base_models")) {
        SAModel m;
        m.gamma = mj.at("gamma");
        m.encoder = detail::network_from_json(mj.at("encoder"));
        m.decoder = detail::network_from_json(mj.at("decoder"));
        m.classifier_head = detail::network_from_json(mj.at("classifier_head"));
        archive.model.base_models.push_back(std::move(m));
        archive.model.gammas.push_back(mj.at("gamma"));
    }
    return archive;
}

}  // namespace bsac
