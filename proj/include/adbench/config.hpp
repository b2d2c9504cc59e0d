#pragma once

// Benchmark run configuration: JSON with strict key checking (typos must
// fail before any work starts) and an exact serialize/parse round trip. The
// serialized copy written into the output directory is what makes every run
// reproducible from its artifacts alone.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "adbench/dataset.hpp"
#include "adbench/errors.hpp"

namespace adbench {

using Json = nlohmann::json;

struct DatasetSpec {
    std::string path;
    std::string target;
    std::string name;                    // defaults to the file path
    std::optional<std::size_t> subsample;

    bool operator==(const DatasetSpec&) const = default;
};

struct ModelSpec {
    std::string kind;
    std::map<std::string, double> hyperparameters;

    bool operator==(const ModelSpec&) const = default;
};

struct MeasureSpecConfig {
    std::string kind;
    int k = 5;                 // neighbors for the kNN family
    std::string context = "own";  // "own" | "train" for gpr_var / rf_sd / bnn_sd
    int n_members = 50;        // bagging size for ensemble_sd / correll
    int n_samples = 1000;      // bnn_sd Monte-Carlo passes
    bool intercept = false;    // leverage intercept column

    bool operator==(const MeasureSpecConfig&) const = default;
};

struct RunConfig {
    std::vector<DatasetSpec> datasets;
    std::vector<ModelSpec> models;
    std::vector<MeasureSpecConfig> measures;
    std::uint64_t seed = 1;
    double percentile = 25.0;
    std::optional<int> window;  // smoothing window; default derived per dataset
    double train_fraction = 0.7;
    std::string output_dir = "out";
    PreprocessSpec preprocess;
    bool save_models = false;

    bool operator==(const RunConfig&) const = default;
};

inline bool operator==(const PreprocessSpec& a, const PreprocessSpec& b) {
    return a.impute == b.impute && a.normalize == b.normalize &&
           a.categorical_encoding == b.categorical_encoding &&
           a.outlier_policy == b.outlier_policy && a.clip_k == b.clip_k &&
           a.correlation_filter == b.correlation_filter &&
           a.correlation_threshold == b.correlation_threshold &&
           a.normalize_target == b.normalize_target;
}

namespace detail {

inline void require_keys(const Json& j, const std::vector<std::string>& allowed,
                         const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (const auto& a : allowed)
            if (a == key) ok = true;
        if (!ok) throw ConfigError(where + ": unknown key '" + key + "'");
    }
}

template <typename T>
T get_or(const Json& j, const std::string& key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const Json::exception& e) {
        throw ConfigError("bad value for '" + key + "': " + e.what());
    }
}

}  // namespace detail

inline PreprocessSpec preprocess_from_json(const Json& j) {
    detail::require_keys(j,
                         {"impute", "normalize", "categorical_encoding", "outlier_policy",
                          "clip_k", "correlation_filter", "correlation_threshold",
                          "normalize_target"},
                         "preprocess");
    PreprocessSpec s;
    const auto impute = detail::get_or<std::string>(j, "impute", "mean");
    if (impute == "mean") s.impute = PreprocessSpec::Impute::mean;
    else if (impute == "median") s.impute = PreprocessSpec::Impute::median;
    else if (impute == "drop_row") s.impute = PreprocessSpec::Impute::drop_row;
    else throw ConfigError("preprocess.impute: unknown value '" + impute + "'");

    const auto norm = detail::get_or<std::string>(j, "normalize", "zscore");
    if (norm == "zscore") s.normalize = PreprocessSpec::Normalize::zscore;
    else if (norm == "none") s.normalize = PreprocessSpec::Normalize::none;
    else throw ConfigError("preprocess.normalize: unknown value '" + norm + "'");

    const auto enc = detail::get_or<std::string>(j, "categorical_encoding", "binary");
    if (enc == "binary") s.categorical_encoding = PreprocessSpec::CategoricalEncoding::binary;
    else if (enc == "none") s.categorical_encoding = PreprocessSpec::CategoricalEncoding::none;
    else throw ConfigError("preprocess.categorical_encoding: unknown value '" + enc + "'");

    const auto outlier = detail::get_or<std::string>(j, "outlier_policy", "keep");
    if (outlier == "keep") s.outlier_policy = PreprocessSpec::OutlierPolicy::keep;
    else if (outlier == "zscore_clip") s.outlier_policy = PreprocessSpec::OutlierPolicy::zscore_clip;
    else throw ConfigError("preprocess.outlier_policy: unknown value '" + outlier + "'");

    s.clip_k = detail::get_or<double>(j, "clip_k", 3.0);
    s.correlation_filter = detail::get_or<bool>(j, "correlation_filter", false);
    s.correlation_threshold = detail::get_or<double>(j, "correlation_threshold", 0.95);
    s.normalize_target = detail::get_or<bool>(j, "normalize_target", true);
    return s;
}

inline Json preprocess_to_json(const PreprocessSpec& s) {
    Json j;
    j["impute"] = s.impute == PreprocessSpec::Impute::mean     ? "mean"
                  : s.impute == PreprocessSpec::Impute::median ? "median"
                                                               : "drop_row";
    j["normalize"] = s.normalize == PreprocessSpec::Normalize::zscore ? "zscore" : "none";
    j["categorical_encoding"] =
        s.categorical_encoding == PreprocessSpec::CategoricalEncoding::binary ? "binary" : "none";
    j["outlier_policy"] =
        s.outlier_policy == PreprocessSpec::OutlierPolicy::keep ? "keep" : "zscore_clip";
    j["clip_k"] = s.clip_k;
    j["correlation_filter"] = s.correlation_filter;
    j["correlation_threshold"] = s.correlation_threshold;
    j["normalize_target"] = s.normalize_target;
    return j;
}

inline RunConfig config_from_json(const Json& j) {
    detail::require_keys(j,
                         {"datasets", "models", "measures", "seed", "percentile", "window",
                          "train_fraction", "output_dir", "preprocess", "save_models"},
                         "config");
    RunConfig c;
    if (!j.contains("datasets") || !j.at("datasets").is_array() || j.at("datasets").empty())
        throw ConfigError("config.datasets: need a nonempty array");
    for (const auto& dj : j.at("datasets")) {
        detail::require_keys(dj, {"path", "target", "name", "subsample"}, "datasets[]");
        DatasetSpec d;
        d.path = detail::get_or<std::string>(dj, "path", "");
        d.target = detail::get_or<std::string>(dj, "target", "");
        if (d.path.empty() || d.target.empty())
            throw ConfigError("datasets[]: path and target are required");
        d.name = detail::get_or<std::string>(dj, "name", d.path);
        if (dj.contains("subsample")) d.subsample = dj.at("subsample").get<std::size_t>();
        c.datasets.push_back(std::move(d));
    }
    if (!j.contains("models") || !j.at("models").is_array() || j.at("models").empty())
        throw ConfigError("config.models: need a nonempty array");
    for (const auto& mj : j.at("models")) {
        detail::require_keys(mj, {"kind", "hyperparameters"}, "models[]");
        ModelSpec m;
        m.kind = detail::get_or<std::string>(mj, "kind", "");
        if (m.kind.empty()) throw ConfigError("models[]: kind is required");
        if (mj.contains("hyperparameters")) {
            for (const auto& [key, val] : mj.at("hyperparameters").items())
                m.hyperparameters[key] = val.get<double>();
        }
        c.models.push_back(std::move(m));
    }
    if (!j.contains("measures") || !j.at("measures").is_array() || j.at("measures").empty())
        throw ConfigError("config.measures: need a nonempty array");
    for (const auto& sj : j.at("measures")) {
        detail::require_keys(sj, {"kind", "k", "context", "n_members", "n_samples", "intercept"},
                             "measures[]");
        MeasureSpecConfig s;
        s.kind = detail::get_or<std::string>(sj, "kind", "");
        if (s.kind.empty()) throw ConfigError("measures[]: kind is required");
        s.k = detail::get_or<int>(sj, "k", 5);
        s.context = detail::get_or<std::string>(sj, "context", "own");
        if (s.context != "own" && s.context != "train")
            throw ConfigError("measures[].context must be 'own' or 'train'");
        s.n_members = detail::get_or<int>(sj, "n_members", 50);
        s.n_samples = detail::get_or<int>(sj, "n_samples", 1000);
        s.intercept = detail::get_or<bool>(sj, "intercept", false);
        c.measures.push_back(std::move(s));
    }
    c.seed = detail::get_or<std::uint64_t>(j, "seed", 1);
    c.percentile = detail::get_or<double>(j, "percentile", 25.0);
    if (j.contains("window") && !j.at("window").is_null())
        c.window = j.at("window").get<int>();
    c.train_fraction = detail::get_or<double>(j, "train_fraction", 0.7);
    c.output_dir = detail::get_or<std::string>(j, "output_dir", "out");
    if (j.contains("preprocess")) c.preprocess = preprocess_from_json(j.at("preprocess"));
    c.save_models = detail::get_or<bool>(j, "save_models", false);

    // names key artifact directories and table rows/columns — duplicates
    // would overwrite each other
    auto check_unique = [](const std::vector<std::string>& names, const char* what) {
        std::vector<std::string> sorted = names;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t i = 1; i < sorted.size(); ++i)
            if (sorted[i] == sorted[i - 1])
                throw ConfigError(std::string(what) + " '" + sorted[i] + "' appears twice");
    };
    std::vector<std::string> ds_names, model_kinds, measure_kinds;
    for (const auto& d : c.datasets) ds_names.push_back(d.name);
    for (const auto& m : c.models) model_kinds.push_back(m.kind);
    for (const auto& s : c.measures) measure_kinds.push_back(s.kind);
    check_unique(ds_names, "dataset name");
    check_unique(model_kinds, "model kind");
    check_unique(measure_kinds, "measure kind");
    return c;
}

inline Json config_to_json(const RunConfig& c) {
    Json j;
    j["datasets"] = Json::array();
    for (const auto& d : c.datasets) {
        Json dj;
        dj["path"] = d.path;
        dj["target"] = d.target;
        dj["name"] = d.name;
        if (d.subsample) dj["subsample"] = *d.subsample;
        j["datasets"].push_back(dj);
    }
    j["models"] = Json::array();
    for (const auto& m : c.models) {
        Json mj;
        mj["kind"] = m.kind;
        if (!m.hyperparameters.empty()) mj["hyperparameters"] = m.hyperparameters;
        j["models"].push_back(mj);
    }
    j["measures"] = Json::array();
    for (const auto& s : c.measures) {
        Json sj;
        sj["kind"] = s.kind;
        sj["k"] = s.k;
        sj["context"] = s.context;
        sj["n_members"] = s.n_members;
        sj["n_samples"] = s.n_samples;
        sj["intercept"] = s.intercept;
        j["measures"].push_back(sj);
    }
    j["seed"] = c.seed;
    j["percentile"] = c.percentile;
    if (c.window) j["window"] = *c.window;
    j["train_fraction"] = c.train_fraction;
    j["output_dir"] = c.output_dir;
    j["preprocess"] = preprocess_to_json(c.preprocess);
    j["save_models"] = c.save_models;
    return j;
}

inline RunConfig parse_config_text(const std::string& text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return config_from_json(j);
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

inline std::string serialize_config(const RunConfig& c) { return config_to_json(c).dump(2); }

// FNV-1a over the canonical serialization (nlohmann objects iterate in
// sorted key order, so the dump is canonical)
inline std::string config_hash(const RunConfig& c) {
    const std::string s = serialize_config(c);
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace adbench
