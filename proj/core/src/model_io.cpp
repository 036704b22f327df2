#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "ctxpath/pipeline.hpp"
#include "text_util.hpp"

namespace ctxpath {

namespace {

using Json = nlohmann::ordered_json;

constexpr const char* kFormatName = "ctxpath-model";

Json array_f64(std::span<const double> values, std::vector<std::size_t> shape) {
    Json a;
    a["dtype"] = "f64";
    a["shape"] = shape;
    a["data"] = Json::array();
    for (double v : values) a["data"].push_back(v);
    return a;
}

std::vector<double> read_f64(const Json& a, std::vector<std::size_t> expected_shape) {
    if (a.at("dtype").get<std::string>() != "f64")
        throw Error(ErrorCode::SchemaViolation, "expected an f64 array");
    const auto shape = a.at("shape").get<std::vector<std::size_t>>();
    if (shape != expected_shape) throw Error(ErrorCode::SchemaViolation, "array shape mismatch");
    const auto data = a.at("data").get<std::vector<double>>();
    std::size_t n = 1;
    for (std::size_t s : shape) n *= s;
    if (data.size() != n) throw Error(ErrorCode::SchemaViolation, "array payload does not match its shape");
    return data;
}

Json config_json(const PipelineConfig& cfg) {
    Json j = Json::object();
    for (const auto& line : detail::split(format_config(cfg), '\n')) {
        if (line.empty()) continue;
        const auto eq = line.find('=');
        j[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return j;
}

PipelineConfig config_from_json(const Json& j) {
    PipelineConfig cfg;
    for (const auto& [key, value] : j.items()) apply_setting(cfg, key, value.get<std::string>());
    validate(cfg);
    return cfg;
}

Json machine_json(const PairMachine& pm) {
    const BinarySvm& m = pm.machine;
    Json j;
    j["first"] = pm.first;
    j["second"] = pm.second;
    j["C"] = m.C;
    j["gamma"] = m.kernel.gamma;
    j["bias"] = m.bias;
    j["converged"] = m.converged;
    j["iterations"] = m.iterations;
    j["support_vectors"] = array_f64(m.support_vectors.data(), {m.support_vectors.rows(), m.support_vectors.cols()});
    j["dual_coef"] = array_f64(m.dual_coef, {m.dual_coef.size()});
    return j;
}

PairMachine machine_from_json(const Json& j, std::size_t dim) {
    PairMachine pm;
    pm.first = j.at("first").get<std::size_t>();
    pm.second = j.at("second").get<std::size_t>();
    BinarySvm& m = pm.machine;
    m.C = j.at("C").get<double>();
    m.kernel.gamma = j.at("gamma").get<double>();
    m.bias = j.at("bias").get<double>();
    m.converged = j.at("converged").get<bool>();
    m.iterations = j.at("iterations").get<std::size_t>();
    const std::size_t s = j.at("dual_coef").at("shape").at(0).get<std::size_t>();
    m.dual_coef = read_f64(j.at("dual_coef"), {s});
    m.support_vectors = Matrix(s, dim, read_f64(j.at("support_vectors"), {s, dim}));
    return pm;
}

}  // namespace

std::string serialize_model(const TrainedModel& model) {
    Json j;
    j["format"] = kFormatName;
    j["format_version"] = TrainedModel::kFormatVersion;
    j["config"] = config_json(model.config);
    j["label_scheme"] = std::string(to_string(model.scheme));
    j["class_names"] = model.class_names();
    j["feature_dim"] = model.feature_dim;

    Json norm;
    norm["colorspace"] = std::string(to_string(model.target.space));
    norm["mean"] = array_f64(model.target.mean, {3});
    norm["std"] = array_f64(model.target.std, {3});
    j["normalization"] = norm;

    const PcaModel& pca = model.pca;
    Json p;
    p["input_dim"] = pca.input_dim;
    p["output_dim"] = pca.output_dim();
    p["total_variance"] = pca.total_variance;
    p["mean"] = array_f64(pca.mean, {pca.input_dim});
    p["components"] = array_f64(pca.components.data(), {pca.output_dim(), pca.input_dim});
    p["explained_variance"] = array_f64(pca.explained_variance, {pca.output_dim()});
    j["pca"] = p;

    Json s;
    s["classes"] = model.svm.classes;
    s["gamma"] = model.svm.kernel.gamma;
    s["pairs"] = Json::array();
    for (const auto& pm : model.svm.pairs) s["pairs"].push_back(machine_json(pm));
    j["svm"] = s;
    return j.dump(1) + "\n";
}

TrainedModel parse_model(std::string_view text) {
    Json j;
    try {
        j = Json::parse(text.begin(), text.end());
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::SchemaViolation, std::string("model file is not valid JSON: ") + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != kFormatName)
            throw Error(ErrorCode::SchemaViolation, "not a ctxpath model document");
        const int version = j.at("format_version").get<int>();
        if (version != TrainedModel::kFormatVersion)
            throw Error(ErrorCode::VersionMismatch, "model format version " + std::to_string(version) +
                                                        ", this build reads version " +
                                                        std::to_string(TrainedModel::kFormatVersion));
        TrainedModel model;
        model.config = config_from_json(j.at("config"));
        model.scheme = parse_label_scheme(j.at("label_scheme").get<std::string>());
        if (model.scheme != (model.config.two_class ? LabelScheme::TwoClass : LabelScheme::FourClass))
            throw Error(ErrorCode::SchemaViolation, "label scheme disagrees with config");
        model.feature_dim = j.at("feature_dim").get<std::size_t>();

        const Json& norm = j.at("normalization");
        model.target.space = parse_color_space(norm.at("colorspace").get<std::string>());
        const auto mean = read_f64(norm.at("mean"), {3});
        const auto spread = read_f64(norm.at("std"), {3});
        for (int c = 0; c < 3; ++c) {
            model.target.mean[c] = mean[c];
            model.target.std[c] = spread[c];
        }

        const Json& p = j.at("pca");
        PcaModel& pca = model.pca;
        pca.input_dim = p.at("input_dim").get<std::size_t>();
        const std::size_t m = p.at("output_dim").get<std::size_t>();
        pca.total_variance = p.at("total_variance").get<double>();
        pca.mean = read_f64(p.at("mean"), {pca.input_dim});
        pca.components = Matrix(m, pca.input_dim, read_f64(p.at("components"), {m, pca.input_dim}));
        pca.explained_variance = read_f64(p.at("explained_variance"), {m});
        const auto k = static_cast<std::size_t>(model.config.block_size);
        if (pca.input_dim != k * k * model.feature_dim)
            throw Error(ErrorCode::SchemaViolation, "PCA input dim is not block_size^2 * feature_dim");

        const Json& s = j.at("svm");
        model.svm.classes = s.at("classes").get<std::vector<int>>();
        model.svm.kernel.gamma = s.at("gamma").get<double>();
        const std::size_t classes = model.svm.classes.size();
        const std::size_t n_names = model.class_names().size();
        for (int c : model.svm.classes)
            if (c < 0 || static_cast<std::size_t>(c) >= n_names)
                throw Error(ErrorCode::SchemaViolation, "SVM class index out of range");
        for (const auto& pj : s.at("pairs")) {
            PairMachine pm = machine_from_json(pj, m);
            if (pm.first >= classes || pm.second >= classes || pm.first == pm.second)
                throw Error(ErrorCode::SchemaViolation, "pair machine refers to unknown classes");
            model.svm.pairs.push_back(std::move(pm));
        }
        if (model.svm.pairs.size() != classes * (classes - 1) / 2 || classes < 2)
            throw Error(ErrorCode::SchemaViolation, "pair machine count does not match class count");
        return model;
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::SchemaViolation, std::string("model document: ") + e.what());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::VersionMismatch || e.code() == ErrorCode::SchemaViolation) throw;
        throw Error(ErrorCode::SchemaViolation, e.what());
    }
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
    const std::string text = serialize_model(model);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write model " + path.string());
    out << text;
    if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

TrainedModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot open model " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_model(ss.str());
}

}  // namespace ctxpath
