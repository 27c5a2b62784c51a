#include "netobs/network_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "netobs/errors.hpp"

namespace netobs {

using nlohmann::json;

namespace {

int node_index(const json& v, int n, const char* what) {
  if (!v.is_number_integer()) throw InvalidInput(std::string(what) + " must be an integer");
  const long long k = v.get<long long>();
  if (k < 1 || k > n) throw InvalidInput(std::string(what) + " out of range 1..n");
  return static_cast<int>(k - 1);
}

json matrix_rows(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

NetworkFile parse_network(const std::string& json_text, ObservabilityOptions options) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw InvalidInput(std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw InvalidInput("network file must be a JSON object");
  for (const char* key : {"n", "edges", "sensors"})
    if (!doc.contains(key)) throw InvalidInput(std::string("missing field '") + key + "'");
  if (!doc["n"].is_number_integer()) throw InvalidInput("'n' must be an integer");
  const int n = doc["n"].get<int>();
  if (n < 2) throw InvalidInput("'n' must be at least 2");

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXi e = Eigen::MatrixXi::Zero(n, n);
  if (!doc["edges"].is_array()) throw InvalidInput("'edges' must be an array");
  for (const json& edge : doc["edges"]) {
    if (!edge.is_array() || edge.size() != 3 || !edge[2].is_number())
      throw InvalidInput("each edge must be [i, j, w]");
    const int i = node_index(edge[0], n, "edge index");
    const int j = node_index(edge[1], n, "edge index");
    if (e(i, j)) throw InvalidInput("duplicate edge entry");
    e(i, j) = 1;
    a(i, j) = edge[2].get<double>();
  }

  if (!doc["sensors"].is_array()) throw InvalidInput("'sensors' must be an array");
  std::vector<int> sensors;
  for (const json& s : doc["sensors"]) sensors.push_back(node_index(s, n, "sensor index"));

  Eigen::MatrixXi mask = e;
  if (doc.contains("constraint")) {
    const json& c = doc["constraint"];
    if (c.is_string()) {
      if (c.get<std::string>() != "same_as_graph")
        throw InvalidInput("unknown constraint keyword");
    } else if (c.is_array()) {
      std::vector<std::pair<int, int>> pairs;
      for (const json& pr : c) {
        if (!pr.is_array() || pr.size() != 2) throw InvalidInput("constraint entries are [i, j]");
        pairs.emplace_back(node_index(pr[0], n, "constraint index"),
                           node_index(pr[1], n, "constraint index"));
      }
      mask = ConstraintMask::from_pairs(n, pairs).mask();
    } else {
      throw InvalidInput("'constraint' must be \"same_as_graph\" or a list of pairs");
    }
  }
  NetworkSystem net(a, e, sensors, options);
  return NetworkFile{std::move(net), ConstraintMask(mask)};
}

NetworkFile load_network(const std::string& path, ObservabilityOptions options) {
  return parse_network(read_text_file(path), options);
}

std::string network_to_json(const NetworkSystem& net, const ConstraintMask& mask) {
  json doc;
  doc["n"] = net.n();
  json edges = json::array();
  for (int i = 0; i < net.n(); ++i)
    for (int j = 0; j < net.n(); ++j)
      if (net.edges()(i, j)) edges.push_back({i + 1, j + 1, net.weights()(i, j)});
  doc["edges"] = edges;
  json sensors = json::array();
  for (int s : net.sensors()) sensors.push_back(s + 1);
  doc["sensors"] = sensors;
  if (mask.mask() == net.edges()) {
    doc["constraint"] = "same_as_graph";
  } else {
    json pairs = json::array();
    for (int i = 0; i < net.n(); ++i)
      for (int j = 0; j < net.n(); ++j)
        if (mask.allows(i, j)) pairs.push_back({i + 1, j + 1});
    doc["constraint"] = pairs;
  }
  return doc.dump(2);
}

std::string perturbation_to_json(const Perturbation& pert, Complex lambda,
                                 const Eigen::VectorXcd& certificate,
                                 const UnobservabilityReport* report) {
  json doc;
  doc["n"] = pert.delta().rows();
  doc["lambda"] = {lambda.real(), lambda.imag()};
  doc["delta"] = matrix_rows(pert.delta());
  doc["frob_cost"] = pert.frob_cost();
  json x = json::array();
  for (int i = 0; i < certificate.size(); ++i) x.push_back({certificate(i).real(), certificate(i).imag()});
  doc["eigenvector"] = x;
  if (report)
    doc["residuals"] = {{"r_eig", report->r_eig}, {"r_out", report->r_out}, {"sigma_min", report->sigma_min}};
  return doc.dump(2);
}

PerturbationFile parse_perturbation(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
    PerturbationFile f;
    const int n = doc.at("n").get<int>();
    f.delta.resize(n, n);
    const json& rows = doc.at("delta");
    if (!rows.is_array() || static_cast<int>(rows.size()) != n)
      throw InvalidInput("perturbation 'delta' must have n rows");
    for (int i = 0; i < n; ++i) {
      if (static_cast<int>(rows[i].size()) != n) throw InvalidInput("perturbation row length");
      for (int j = 0; j < n; ++j) f.delta(i, j) = rows[i][j].get<double>();
    }
    f.lambda = Complex(doc.at("lambda")[0].get<double>(), doc.at("lambda")[1].get<double>());
    const json& x = doc.at("eigenvector");
    f.certificate.resize(static_cast<int>(x.size()));
    for (size_t i = 0; i < x.size(); ++i)
      f.certificate(static_cast<int>(i)) = Complex(x[i][0].get<double>(), x[i][1].get<double>());
    if (doc.contains("residuals")) {
      const json& r = doc.at("residuals");
      f.residuals = StoredResiduals{r.at("r_eig").get<double>(), r.at("r_out").get<double>(),
                                    r.at("sigma_min").get<double>()};
    }
    return f;
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("malformed perturbation file: ") + e.what());
  }
}

}  // namespace netobs
