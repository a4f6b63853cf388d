#include "csmix/dataset_io.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace csmix {

using nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(tok);
  return out;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  return f;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path);
  return f;
}

}  // namespace

std::string meta_path_for(const std::string& csv_path) {
  if (csv_path.size() > 4 && csv_path.substr(csv_path.size() - 4) == ".csv")
    return csv_path.substr(0, csv_path.size() - 4) + ".meta.json";
  return csv_path + ".meta.json";
}

void write_dataset(const PanelDataset& data, const std::string& csv_path) {
  auto f = open_out(csv_path);
  f << "subject,occasion,choice";
  for (int k = 1; k <= data.d_x; ++k) f << ",x" << k;
  for (int k = 1; k <= data.d_z; ++k) f << ",z" << k;
  f << ",alternative\n";
  for (int i = 0; i < data.n; ++i) {
    const auto& sub = data.subjects[i];
    for (int t = 0; t < sub.T(); ++t) {
      for (int j = 0; j < data.J; ++j) {
        f << (i + 1) << ',' << (t + 1) << ',' << (sub.y[t] + 1);
        for (int k = 0; k < data.d_x; ++k) f << ',' << fmt(data.x_at(i, t, j)[k]);
        for (int k = 0; k < data.d_z; ++k) f << ',' << fmt(data.z_at(i, t, j)[k]);
        f << ',' << (j + 1) << '\n';
      }
    }
  }

  json meta;
  meta["n"] = data.n;
  meta["J"] = data.J;
  meta["d_x"] = data.d_x;
  meta["d_z"] = data.d_z;
  meta["outside_option"] = data.outside_option;
  auto mf = open_out(meta_path_for(csv_path));
  mf << meta.dump(2) << '\n';
}

PanelDataset read_dataset(const std::string& csv_path) {
  json meta;
  {
    auto mf = open_in(meta_path_for(csv_path));
    mf >> meta;
  }
  PanelDataset data;
  data.n = meta.at("n").get<int>();
  data.J = meta.at("J").get<int>();
  data.d_x = meta.at("d_x").get<int>();
  data.d_z = meta.at("d_z").get<int>();
  data.outside_option = meta.value("outside_option", false);
  if (data.n < 0 || data.J < 1) throw std::runtime_error("dataset metadata: bad dimensions");
  data.subjects.resize(data.n);

  auto f = open_in(csv_path);
  std::string line;
  if (!std::getline(f, line)) throw std::runtime_error("dataset csv: missing header");
  const auto header = split_csv_line(line);
  const std::size_t want_cols = 4 + data.d_x + data.d_z;
  if (header.size() != want_cols) throw std::runtime_error("dataset csv: header does not match metadata");

  const double nan = std::numeric_limits<double>::quiet_NaN();
  struct Occ {
    int choice = -1;
    std::vector<double> x, z;
    std::vector<char> seen;
  };
  std::vector<std::vector<Occ>> rows(data.n);

  long lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cols = split_csv_line(line);
    if (cols.size() != want_cols)
      throw std::runtime_error("dataset csv: wrong column count at line " + std::to_string(lineno));
    const int subj = std::stoi(cols[0]);
    const int occ = std::stoi(cols[1]);
    const int choice = std::stoi(cols[2]);
    const int alt = std::stoi(cols[want_cols - 1]);
    if (subj < 1 || subj > data.n) throw std::runtime_error("dataset csv: subject out of range at line " + std::to_string(lineno));
    if (alt < 1 || alt > data.J) throw std::runtime_error("dataset csv: alternative out of range at line " + std::to_string(lineno));
    if (occ < 1) throw std::runtime_error("dataset csv: occasion out of range at line " + std::to_string(lineno));
    auto& subj_rows = rows[subj - 1];
    if (static_cast<int>(subj_rows.size()) < occ) subj_rows.resize(occ);
    Occ& o = subj_rows[occ - 1];
    if (o.x.empty()) {
      o.x.assign(static_cast<std::size_t>(data.J) * data.d_x, nan);
      o.z.assign(static_cast<std::size_t>(data.J) * data.d_z, nan);
      o.seen.assign(data.J, 0);
    }
    if (o.choice >= 0 && o.choice != choice)
      throw std::runtime_error("dataset csv: inconsistent choice at line " + std::to_string(lineno));
    o.choice = choice;
    const int j = alt - 1;
    for (int k = 0; k < data.d_x; ++k) o.x[static_cast<std::size_t>(j) * data.d_x + k] = std::stod(cols[3 + k]);
    for (int k = 0; k < data.d_z; ++k)
      o.z[static_cast<std::size_t>(j) * data.d_z + k] = std::stod(cols[3 + data.d_x + k]);
    o.seen[j] = 1;
  }

  for (int i = 0; i < data.n; ++i) {
    auto& sub = data.subjects[i];
    const auto& subj_rows = rows[i];
    const int T = static_cast<int>(subj_rows.size());
    sub.y.resize(T);
    sub.x.assign(static_cast<std::size_t>(T) * data.J * data.d_x, nan);
    sub.z.assign(static_cast<std::size_t>(T) * data.J * data.d_z, nan);
    for (int t = 0; t < T; ++t) {
      const Occ& o = subj_rows[t];
      // choice may be out of range in a malformed file; validate_dataset reports it
      sub.y[t] = o.choice - 1;
      if (!o.x.empty()) {
        std::copy(o.x.begin(), o.x.end(),
                  sub.x.begin() + static_cast<std::size_t>(t) * data.J * data.d_x);
        std::copy(o.z.begin(), o.z.end(),
                  sub.z.begin() + static_cast<std::size_t>(t) * data.J * data.d_z);
      }
    }
  }
  return data;
}

void write_truth_cs(const ConsiderationState& truth, const std::string& path) {
  auto f = open_out(path);
  f << "subject,category,included\n";
  for (int i = 0; i < truth.n(); ++i)
    for (std::size_t j = 0; j < truth.rows[i].size(); ++j)
      f << (i + 1) << ',' << (j + 1) << ',' << int(truth.rows[i][j]) << '\n';
}

ConsiderationState read_truth_cs(const std::string& path, int n, int J) {
  ConsiderationState cs;
  cs.rows.assign(n, CsRow(J, 0));
  auto f = open_in(path);
  std::string line;
  std::getline(f, line);  // header
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    const auto cols = split_csv_line(line);
    if (cols.size() != 3) throw std::runtime_error("truth_cs: bad row");
    const int i = std::stoi(cols[0]) - 1;
    const int j = std::stoi(cols[1]) - 1;
    if (i < 0 || i >= n || j < 0 || j >= J) throw std::runtime_error("truth_cs: index out of range");
    cs.rows[i][j] = static_cast<std::uint8_t>(std::stoi(cols[2]) != 0);
  }
  return cs;
}

namespace {

json vec_to_json(const VectorXd& v) {
  json a = json::array();
  for (int k = 0; k < v.size(); ++k) a.push_back(v[k]);
  return a;
}

VectorXd vec_from_json(const json& a) {
  VectorXd v(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) v[k] = a[k].get<double>();
  return v;
}

json mat_to_json(const MatrixXd& m) {
  json a = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    a.push_back(row);
  }
  return a;
}

MatrixXd mat_from_json(const json& a) {
  const int r = static_cast<int>(a.size());
  const int c = r ? static_cast<int>(a[0].size()) : 0;
  MatrixXd m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = a[i][j].get<double>();
  return m;
}

}  // namespace

void save_sampler_state(const SamplerState& state, const std::string& path) {
  json j;
  j["iter"] = state.iter;
  j["panel_ll"] = state.panel_ll;
  j["delta"] = vec_to_json(state.params.delta);
  j["beta"] = vec_to_json(state.params.beta);
  j["D"] = mat_to_json(state.params.D);
  json bs = json::array();
  for (const auto& bi : state.params.b) bs.push_back(vec_to_json(bi));
  j["b"] = bs;
  json cs = json::array();
  for (const auto& row : state.C.rows) cs.push_back(cs_bits_string(row));
  j["C"] = cs;
  j["mix"] = {
      {"kstar", state.mix.kstar}, {"V", state.mix.V},   {"omega", state.mix.omega}, {"Q", state.mix.Q},
      {"S", state.mix.S},         {"u", state.mix.u},   {"alpha", state.mix.alpha},
  };
  auto f = open_out(path);
  f << j.dump() << '\n';
}

SamplerState load_sampler_state(const std::string& path) {
  json j;
  {
    auto f = open_in(path);
    f >> j;
  }
  SamplerState st;
  st.iter = j.at("iter").get<long>();
  st.panel_ll = j.at("panel_ll").get<double>();
  st.params.delta = vec_from_json(j.at("delta"));
  st.params.beta = vec_from_json(j.at("beta"));
  st.params.D = mat_from_json(j.at("D"));
  for (const auto& bi : j.at("b")) st.params.b.push_back(vec_from_json(bi));
  for (const auto& row : j.at("C")) st.C.rows.push_back(cs_from_bits_string(row.get<std::string>()));
  const auto& m = j.at("mix");
  st.mix.kstar = m.at("kstar").get<int>();
  st.mix.V = m.at("V").get<std::vector<double>>();
  st.mix.omega = m.at("omega").get<std::vector<double>>();
  st.mix.Q = m.at("Q").get<std::vector<std::vector<double>>>();
  st.mix.S = m.at("S").get<std::vector<int>>();
  st.mix.u = m.at("u").get<std::vector<double>>();
  st.mix.alpha = m.at("alpha").get<double>();
  return st;
}

}  // namespace csmix
