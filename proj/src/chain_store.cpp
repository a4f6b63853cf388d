#include "csmix/chain_store.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
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

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(tok);
  return out;
}

std::string cs_bits(const CsRow& row) {
  std::string s(row.size(), '0');
  for (std::size_t j = 0; j < row.size(); ++j)
    if (row[j]) s[j] = '1';
  return s;
}

}  // namespace

void ChainStore::save(const std::string& dir) const {
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  json meta;
  meta["seed"] = seed;
  meta["iters"] = iters;
  meta["burnin"] = burnin;
  meta["thin"] = thin;
  meta["variant"] = variant;
  meta["n"] = n;
  meta["J"] = J;
  meta["d_x"] = d_x;
  meta["d_z"] = d_z;
  meta["has_re"] = has_re;
  meta["has_cs"] = has_cs;
  meta["num_draws"] = num_draws();
  {
    auto f = open_out(dir + "/meta.json");
    f << meta.dump(2) << '\n';
  }

  {
    auto f = open_out(dir + "/draws_params.csv");
    f << "iter,alpha,kstar";
    for (int k = 1; k <= d_x; ++k) f << ",beta" << k;
    for (int k = 1; k <= J; ++k) f << ",delta" << k;
    if (has_re)
      for (int r = 0; r < d_z; ++r)
        for (int c = 0; c <= r; ++c) f << ",D" << (r + 1) << (c + 1);
    f << '\n';
    for (const auto& d : draws) {
      f << d.iter << ',' << fmt(d.alpha) << ',' << d.kstar;
      for (int k = 0; k < d_x; ++k) f << ',' << fmt(d.beta[k]);
      for (int k = 0; k < J; ++k) f << ',' << fmt(d.delta[k]);
      if (has_re)
        for (int r = 0; r < d_z; ++r)
          for (int c = 0; c <= r; ++c) f << ',' << fmt(d.D(r, c));
      f << '\n';
    }
  }

  if (has_re) {
    auto f = open_out(dir + "/draws_b.csv");
    f << "iter,subject";
    for (int k = 1; k <= d_z; ++k) f << ",b" << k;
    f << '\n';
    for (const auto& d : draws)
      for (int i = 0; i < n; ++i) {
        f << d.iter << ',' << (i + 1);
        for (int k = 0; k < d_z; ++k) f << ',' << fmt(d.b[i][k]);
        f << '\n';
      }
  }

  {
    auto f = open_out(dir + "/draws_C.csv");
    f << "iter,subject,bits\n";
    for (const auto& d : draws)
      for (int i = 0; i < n; ++i) f << d.iter << ',' << (i + 1) << ',' << cs_bits(d.C[i]) << '\n';
  }

  {
    auto f = open_out(dir + "/draws_S.csv");
    f << "iter,subject,component\n";
    for (const auto& d : draws)
      for (int i = 0; i < n; ++i) f << d.iter << ',' << (i + 1) << ',' << (d.S[i] + 1) << '\n';
  }

  {
    auto f = open_out(dir + "/draws_mix.csv");
    f << "iter,component,omega";
    for (int k = 1; k <= J; ++k) f << ",q" << k;
    f << '\n';
    for (const auto& d : draws)
      for (int h = 0; h < d.kstar; ++h) {
        f << d.iter << ',' << (h + 1) << ',' << fmt(d.omega[h]);
        for (int k = 0; k < J; ++k) f << ',' << fmt(d.Q[h][k]);
        f << '\n';
      }
  }

  {
    auto f = open_out(dir + "/accept_rates.csv");
    f << "iter_end,block,proposals,accepted,rate\n";
    for (const auto& w : accept_windows)
      f << w.iter_end << ',' << w.block << ',' << w.proposals << ',' << w.accepted << ','
        << fmt(w.proposals ? double(w.accepted) / double(w.proposals) : 0.0) << '\n';
  }
}

ChainStore ChainStore::load(const std::string& dir) {
  ChainStore ch;
  json meta;
  {
    auto f = open_in(dir + "/meta.json");
    f >> meta;
  }
  ch.seed = meta.at("seed").get<std::uint64_t>();
  ch.iters = meta.at("iters").get<long>();
  ch.burnin = meta.at("burnin").get<long>();
  ch.thin = meta.at("thin").get<int>();
  ch.variant = meta.at("variant").get<std::string>();
  ch.n = meta.at("n").get<int>();
  ch.J = meta.at("J").get<int>();
  ch.d_x = meta.at("d_x").get<int>();
  ch.d_z = meta.at("d_z").get<int>();
  ch.has_re = meta.at("has_re").get<bool>();
  ch.has_cs = meta.at("has_cs").get<bool>();
  const int G = meta.at("num_draws").get<int>();
  ch.draws.resize(G);

  std::string line;
  {
    auto f = open_in(dir + "/draws_params.csv");
    std::getline(f, line);  // header
    for (int g = 0; g < G; ++g) {
      if (!std::getline(f, line)) throw std::runtime_error("draws_params.csv: truncated");
      const auto cols = split(line);
      auto& d = ch.draws[g];
      std::size_t c = 0;
      d.iter = std::stol(cols[c++]);
      d.alpha = std::stod(cols[c++]);
      d.kstar = std::stoi(cols[c++]);
      d.beta.resize(ch.d_x);
      for (int k = 0; k < ch.d_x; ++k) d.beta[k] = std::stod(cols[c++]);
      d.delta.resize(ch.J);
      for (int k = 0; k < ch.J; ++k) d.delta[k] = std::stod(cols[c++]);
      if (ch.has_re) {
        d.D.resize(ch.d_z, ch.d_z);
        for (int r = 0; r < ch.d_z; ++r)
          for (int cc = 0; cc <= r; ++cc) {
            d.D(r, cc) = std::stod(cols[c++]);
            d.D(cc, r) = d.D(r, cc);
          }
      }
    }
  }

  if (ch.has_re) {
    auto f = open_in(dir + "/draws_b.csv");
    std::getline(f, line);
    for (int g = 0; g < G; ++g) {
      ch.draws[g].b.assign(ch.n, VectorXd(ch.d_z));
      for (int i = 0; i < ch.n; ++i) {
        if (!std::getline(f, line)) throw std::runtime_error("draws_b.csv: truncated");
        const auto cols = split(line);
        for (int k = 0; k < ch.d_z; ++k) ch.draws[g].b[i][k] = std::stod(cols[2 + k]);
      }
    }
  }

  {
    auto f = open_in(dir + "/draws_C.csv");
    std::getline(f, line);
    for (int g = 0; g < G; ++g) {
      ch.draws[g].C.resize(ch.n);
      for (int i = 0; i < ch.n; ++i) {
        if (!std::getline(f, line)) throw std::runtime_error("draws_C.csv: truncated");
        const auto cols = split(line);
        ch.draws[g].C[i] = cs_from_bits_string(cols[2]);
      }
    }
  }

  {
    auto f = open_in(dir + "/draws_S.csv");
    std::getline(f, line);
    for (int g = 0; g < G; ++g) {
      ch.draws[g].S.resize(ch.n);
      for (int i = 0; i < ch.n; ++i) {
        if (!std::getline(f, line)) throw std::runtime_error("draws_S.csv: truncated");
        const auto cols = split(line);
        ch.draws[g].S[i] = std::stoi(cols[2]) - 1;
      }
    }
  }

  {
    auto f = open_in(dir + "/draws_mix.csv");
    std::getline(f, line);
    for (int g = 0; g < G; ++g) {
      auto& d = ch.draws[g];
      d.omega.resize(d.kstar);
      d.Q.assign(d.kstar, std::vector<double>(ch.J));
      for (int h = 0; h < d.kstar; ++h) {
        if (!std::getline(f, line)) throw std::runtime_error("draws_mix.csv: truncated");
        const auto cols = split(line);
        d.omega[h] = std::stod(cols[2]);
        for (int k = 0; k < ch.J; ++k) d.Q[h][k] = std::stod(cols[3 + k]);
      }
    }
  }

  {
    auto f = open_in(dir + "/accept_rates.csv");
    std::getline(f, line);
    while (std::getline(f, line)) {
      if (line.empty()) continue;
      const auto cols = split(line);
      ch.accept_windows.push_back({std::stol(cols[0]), cols[1], std::stol(cols[2]), std::stol(cols[3])});
    }
  }
  return ch;
}

}  // namespace csmix
