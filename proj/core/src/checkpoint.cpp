#include "bitcurve/checkpoint.hpp"

#include <fstream>

#include "bitcurve/errors.hpp"
#include "json.hpp"

namespace bitcurve::io {

namespace {

constexpr int kCheckpointMajor = 1;

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& rows) {
  const auto r = rows.size();
  const auto c = r == 0 ? 0 : rows.at(0).size();
  Eigen::MatrixXd m(r, c);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rows.at(i).at(j).get<double>();
    }
  }
  return m;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint) {
  const auto& hp = checkpoint.model.hyperparams();
  nlohmann::json obj;
  obj["schema"] = "bitcurve/model";
  obj["version"] = kCheckpointMajor;
  obj["basis"] = curve::basis_name(checkpoint.basis);
  obj["grid"] = curve::layer_grid_name(checkpoint.grid);
  obj["pool_size"] = checkpoint.pool_size;

  obj["tasks"] = {{"epochs", checkpoint.tasks.epochs},
                  {"costs", checkpoint.tasks.costs},
                  {"noise_var", checkpoint.tasks.noise_var}};

  nlohmann::json model;
  model["lengthscales"] = std::vector<double>(
      hp.lengthscales.data(), hp.lengthscales.data() + hp.lengthscales.size());
  model["signal_variance"] = hp.signal_variance;
  model["task_factor"] = matrix_to_json(hp.task_factor);
  model["noise_var"] =
      std::vector<double>(hp.noise_var.data(), hp.noise_var.data() + hp.noise_var.size());
  model["jitter"] = hp.jitter;
  model["y_mean"] = checkpoint.model.y_mean();
  model["y_std"] = checkpoint.model.y_std();

  nlohmann::json observations = nlohmann::json::array();
  for (const auto& obs : checkpoint.model.data()) {
    observations.push_back(
        {{"x", obs.x}, {"task", obs.task}, {"y", obs.y}, {"cost", obs.cost}});
  }
  model["observations"] = std::move(observations);
  obj["model"] = std::move(model);

  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << obj.dump(2) << "\n";
  out.flush();
  if (!out) throw std::runtime_error("failed writing checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open checkpoint: " + path);
  nlohmann::json obj;
  try {
    in >> obj;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  try {
    if (obj.value("schema", "") != "bitcurve/model") {
      throw ParseError(path + ": not a bitcurve/model checkpoint");
    }
    if (obj.value("version", 0) > kCheckpointMajor) {
      throw ParseError(path + ": unsupported checkpoint version");
    }

    gp::TaskSet tasks;
    tasks.epochs = obj.at("tasks").at("epochs").get<std::vector<int>>();
    tasks.costs = obj.at("tasks").at("costs").get<std::vector<double>>();
    tasks.noise_var = obj.at("tasks").at("noise_var").get<std::vector<double>>();
    tasks.validate();

    const auto& model = obj.at("model");
    gp::Hyperparams hp;
    const auto lengthscales = model.at("lengthscales").get<std::vector<double>>();
    hp.lengthscales = Eigen::Map<const Eigen::VectorXd>(
        lengthscales.data(), static_cast<Eigen::Index>(lengthscales.size()));
    hp.signal_variance = model.at("signal_variance").get<double>();
    hp.task_factor = matrix_from_json(model.at("task_factor"));
    const auto noise = model.at("noise_var").get<std::vector<double>>();
    hp.noise_var =
        Eigen::Map<const Eigen::VectorXd>(noise.data(), static_cast<Eigen::Index>(noise.size()));
    hp.jitter = model.at("jitter").get<double>();

    std::vector<gp::Observation> data;
    for (const auto& entry : model.at("observations")) {
      gp::Observation obs;
      obs.x = entry.at("x").get<std::vector<double>>();
      obs.task = entry.at("task").get<int>();
      obs.y = entry.at("y").get<double>();
      obs.cost = entry.value("cost", 0.0);
      data.push_back(std::move(obs));
    }

    Checkpoint checkpoint{
        gp::MultiTaskGp(std::move(hp), std::move(data), model.at("y_mean").get<double>(),
                        model.at("y_std").get<double>()),
        std::move(tasks), curve::basis_from_name(obj.at("basis").get<std::string>()),
        curve::layer_grid_from_name(obj.at("grid").get<std::string>()),
        obj.value("pool_size", 0)};
    return checkpoint;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace bitcurve::io
