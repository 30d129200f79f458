#include <fstream>

#include <json.hpp>

#include "bhpair/error.hpp"
#include "bhpair/mps.hpp"

namespace bhpair {

namespace {

using nlohmann::json;

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(rows)}};
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  Eigen::MatrixXd m(rows, cols);
  const auto& data = j.at("data");
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index k = 0; k < cols; ++k)
      m(i, k) = data.at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(k)).get<double>();
  return m;
}

}  // namespace

void save_checkpoint(const std::string& path, const MPSState& st, const ModelParams& params) {
  json j;
  j["format"] = "bhpair-itebd";
  j["version"] = 1;
  j["n_max"] = st.n_max;
  j["chi"] = st.chi;
  j["seed"] = st.seed;
  j["converged"] = st.converged;
  j["canonical_residual"] = st.canonical_residual;
  j["params"] = to_key_values(params);
  for (std::size_t site = 0; site < 2; ++site) {
    json tensors = json::array();
    for (const auto& g : st.tensors[site]) tensors.push_back(matrix_to_json(g));
    j["tensors"].push_back(std::move(tensors));
    j["schmidt"].push_back(std::vector<double>(st.schmidt[site].data(),
                                               st.schmidt[site].data() + st.schmidt[site].size()));
  }
  if (st.charged()) j["charges"] = st.charges;
  for (const auto& rec : st.log)
    j["log"].push_back(
        {{"dt", rec.dt}, {"steps", rec.steps}, {"free_energy", rec.free_energy}, {"converged", rec.converged}});
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw Error("cannot write checkpoint " + tmp);
    out << j.dump() << '\n';
    if (!out) throw Error("failed writing checkpoint " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) throw Error("cannot move checkpoint into " + path);
}

MPSState load_checkpoint(const std::string& path, ModelParams* params) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open checkpoint " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error("malformed checkpoint " + path + ": " + e.what());
  }
  if (j.value("format", "") != "bhpair-itebd") throw Error("not an iTEBD checkpoint: " + path);
  MPSState st;
  try {
    st.n_max = j.at("n_max").get<int>();
    st.chi = j.at("chi").get<int>();
    st.seed = j.at("seed").get<std::uint64_t>();
    st.converged = j.at("converged").get<bool>();
    for (std::size_t site = 0; site < 2; ++site) {
      for (const auto& t : j.at("tensors").at(site)) st.tensors[site].push_back(matrix_from_json(t));
      const auto w = j.at("schmidt").at(site).get<std::vector<double>>();
      st.schmidt[site] = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
    }
    if (j.contains("charges")) st.charges = j.at("charges").get<std::array<std::vector<int>, 2>>();
    if (j.contains("log"))
      for (const auto& r : j.at("log"))
        st.log.push_back({r.at("dt").get<double>(), r.at("steps").get<long>(),
                          r.at("free_energy").get<double>(), r.at("converged").get<bool>()});
    if (params) *params = model_from_key_values(j.at("params").get<std::map<std::string, std::string>>());
  } catch (const json::exception& e) {
    throw Error("malformed checkpoint " + path + ": " + e.what());
  }
  if (static_cast<int>(st.tensors[0].size()) != st.phys_dim() ||
      static_cast<int>(st.tensors[1].size()) != st.phys_dim())
    throw Error("checkpoint tensors do not match n_max");
  if (st.charged() && (st.charges[0].size() != static_cast<std::size_t>(st.schmidt[0].size()) ||
                       st.charges[1].size() != static_cast<std::size_t>(st.schmidt[1].size())))
    throw Error("checkpoint charges do not match the bond dimensions");
  st.canonical_residual = canonical_residual(st);
  return st;
}

}  // namespace bhpair
