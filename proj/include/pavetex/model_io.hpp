#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "pavetex/dataset.hpp"
#include "pavetex/error.hpp"
#include "pavetex/learning.hpp"
#include "pavetex/texture.hpp"

namespace pavetex {

inline constexpr int kModelFormatVersion = 1;

// Classifier plus the extraction settings it was trained with.
struct TrainedModel {
  EcocModel ecoc;
  TextureParams texture;
  int patch_side = 500;
};

namespace detail {

using ojson = nlohmann::ordered_json;

inline ojson matrix_json(const Matrix& m) {
  ojson rows = ojson::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    ojson row = ojson::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix matrix_from(const ojson& j, Eigen::Index cols) {
  Matrix m(static_cast<Eigen::Index>(j.size()), cols);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const auto& row = j.at(static_cast<std::size_t>(r));
    if (static_cast<Eigen::Index>(row.size()) != cols) fail(ErrorKind::InvalidInput, "ragged matrix in model file");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return m;
}

inline std::vector<double> vector_values(const Vector& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace detail

inline std::string model_to_json(const TrainedModel& model) {
  using detail::ojson;
  const EcocModel& e = model.ecoc;
  ojson j;
  j["format"] = "pavetex-model";
  j["version"] = kModelFormatVersion;
  j["classes"] = e.classes;
  ojson coding = ojson::array();
  for (std::size_t r = 0; r < e.classes.size(); ++r) {
    ojson row = ojson::array();
    for (std::size_t c = 0; c < e.classes.size(); ++c) row.push_back(e.code(r, c));
    coding.push_back(std::move(row));
  }
  j["coding"] = std::move(coding);
  j["seed"] = e.options.seed;
  j["hyperparameters"] = {{"svm_c", e.options.c},
                          {"pca_variance", e.options.variance_fraction},
                          {"platt_folds", e.options.platt_folds},
                          {"per_class", e.per_class}};
  const TextureParams& t = model.texture;
  j["texture"] = {{"patch_side", model.patch_side},
                  {"glcm_levels", t.glcm_levels},
                  {"haralick_window", t.haralick_window},
                  {"collage_window", t.collage_window},
                  {"collage_bins", t.collage_bins},
                  {"haralick_aggregation", t.haralick_aggregation == Aggregation::Mean ? "mean" : "sum"},
                  {"peak_min_height", t.peak_min_height},
                  {"peak_min_separation", t.peak_min_separation},
                  {"peak_reference_side", t.peak_reference_side}};
  const StandardizerPca& p = e.pca;
  j["standardizer"] = {{"mean", p.mean}, {"stddev", p.stddev}, {"kept", p.kept}};
  j["pca"] = {{"variance_fraction", p.variance_fraction},
              {"explained", p.explained},
              {"components", detail::matrix_json(p.components)}};
  ojson learners = ojson::array();
  for (const auto& l : e.learners) {
    learners.push_back({{"weights", detail::vector_values(l.weights)},
                        {"bias", l.bias},
                        {"c", l.c},
                        {"platt_a", l.platt_a},
                        {"platt_b", l.platt_b}});
  }
  j["learners"] = std::move(learners);
  return j.dump(1) + '\n';
}

inline TrainedModel model_from_json(const std::string& text) {
  TrainedModel m;
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("format").get<std::string>() != "pavetex-model") fail(ErrorKind::InvalidInput, "not a model file");
    if (j.at("version").get<int>() != kModelFormatVersion) fail(ErrorKind::InvalidInput, "unsupported model version");
    EcocModel& e = m.ecoc;
    e.classes = j.at("classes").get<std::vector<std::string>>();
    e.options.seed = j.at("seed").get<std::uint64_t>();
    const auto& h = j.at("hyperparameters");
    e.options.c = h.at("svm_c").get<double>();
    e.options.variance_fraction = h.at("pca_variance").get<double>();
    e.options.platt_folds = h.at("platt_folds").get<int>();
    e.per_class = h.at("per_class").get<std::size_t>();
    const auto& t = j.at("texture");
    m.patch_side = t.at("patch_side").get<int>();
    m.texture.glcm_levels = t.at("glcm_levels").get<int>();
    m.texture.haralick_window = t.at("haralick_window").get<int>();
    m.texture.collage_window = t.at("collage_window").get<int>();
    m.texture.collage_bins = t.at("collage_bins").get<int>();
    m.texture.haralick_aggregation = t.at("haralick_aggregation").get<std::string>() == "sum" ? Aggregation::Sum : Aggregation::Mean;
    m.texture.peak_min_height = t.at("peak_min_height").get<int>();
    m.texture.peak_min_separation = t.at("peak_min_separation").get<int>();
    m.texture.peak_reference_side = t.at("peak_reference_side").get<int>();
    StandardizerPca& p = e.pca;
    p.mean = j.at("standardizer").at("mean").get<std::vector<double>>();
    p.stddev = j.at("standardizer").at("stddev").get<std::vector<double>>();
    p.kept = j.at("standardizer").at("kept").get<std::vector<int>>();
    p.variance_fraction = j.at("pca").at("variance_fraction").get<double>();
    p.explained = j.at("pca").at("explained").get<std::vector<double>>();
    p.components = detail::matrix_from(j.at("pca").at("components"), static_cast<Eigen::Index>(p.kept.size()));
    for (const auto& lj : j.at("learners")) {
      LinearLearner l;
      const auto w = lj.at("weights").get<std::vector<double>>();
      if (static_cast<Eigen::Index>(w.size()) != p.components.rows()) fail(ErrorKind::InvalidInput, "learner size mismatch");
      l.weights = Eigen::Map<const Vector>(w.data(), static_cast<Eigen::Index>(w.size()));
      l.bias = lj.at("bias").get<double>();
      l.c = lj.at("c").get<double>();
      l.platt_a = lj.at("platt_a").get<double>();
      l.platt_b = lj.at("platt_b").get<double>();
      e.learners.push_back(std::move(l));
    }
    if (e.learners.size() != e.classes.size()) fail(ErrorKind::InvalidInput, "one learner per class expected");
  } catch (const nlohmann::json::exception& ex) {
    fail(ErrorKind::InvalidInput, std::string("malformed model file: ") + ex.what());
  }
  return m;
}

inline void save_model(const std::filesystem::path& path, const TrainedModel& model) {
  write_text(path, model_to_json(model));
}

inline TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::IoError, "cannot open model " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

}  // namespace pavetex
