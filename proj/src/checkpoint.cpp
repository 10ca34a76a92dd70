#include "beam/checkpoint.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "beam/textio.hpp"

namespace beam {

namespace {

constexpr const char* kVersionLine = "beam-checkpoint v1";

struct TokenReader {
  std::vector<std::string> toks;
  std::size_t at = 0;

  explicit TokenReader(std::istream& in) {
    std::string t;
    while (in >> t) toks.push_back(t);
  }

  const std::string& next(const std::string& what) {
    if (at >= toks.size()) {
      throw std::runtime_error("checkpoint: unexpected end of file, wanted " +
                               what);
    }
    return toks[at++];
  }

  void expect(const std::string& kw) {
    const std::string& t = next("'" + kw + "'");
    if (t != kw) {
      throw std::runtime_error("checkpoint: expected '" + kw + "', got '" + t +
                               "'");
    }
  }

  double number(const std::string& what) { return parse_double(next(what), what); }
  long long integer(const std::string& what) { return parse_int(next(what), what); }
  std::uint64_t u64(const std::string& what) { return parse_u64(next(what), what); }
};

const char* kind_name(LayerKind k) {
  return k == LayerKind::bernoulli ? "bernoulli" : "gaussian";
}

LayerKind kind_from(const std::string& s) {
  if (s == "bernoulli") return LayerKind::bernoulli;
  if (s == "gaussian") return LayerKind::gaussian;
  throw std::runtime_error("checkpoint: unknown layer kind '" + s + "'");
}

void write_vector(std::ostream& out, const char* label,
                  const std::vector<double>& xs) {
  out << label;
  for (double x : xs) out << ' ' << format_double(x);
  out << '\n';
}

void read_vector(TokenReader& r, const char* label, std::vector<double>& xs,
                 std::size_t n) {
  r.expect(label);
  xs.resize(n);
  for (std::size_t i = 0; i < n; ++i) xs[i] = r.number(label);
}

void write_matrix(std::ostream& out, const char* label,
                  const std::vector<double>& xs, int rows, int cols) {
  out << label << '\n';
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      if (j) out << ' ';
      out << format_double(xs[static_cast<std::size_t>(i) * cols + j]);
    }
    out << '\n';
  }
}

void read_matrix(TokenReader& r, const char* label, std::vector<double>& xs,
                 int rows, int cols) {
  r.expect(label);
  xs.resize(static_cast<std::size_t>(rows) * cols);
  for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = r.number(label);
}

void write_bundle(std::ostream& out, const std::string& prefix,
                  const GradientBundle& g, int nv, int nh) {
  write_vector(out, (prefix + "_visible_loc").c_str(), g.visible_loc);
  write_vector(out, (prefix + "_visible_log_scale").c_str(), g.visible_log_scale);
  write_vector(out, (prefix + "_hidden_bias").c_str(), g.hidden_bias);
  write_matrix(out, (prefix + "_weights").c_str(), g.weights, nv, nh);
}

void read_bundle(TokenReader& r, const std::string& prefix, GradientBundle& g,
                 int nv, int nh) {
  read_vector(r, (prefix + "_visible_loc").c_str(), g.visible_loc, nv);
  read_vector(r, (prefix + "_visible_log_scale").c_str(), g.visible_log_scale, nv);
  read_vector(r, (prefix + "_hidden_bias").c_str(), g.hidden_bias, nh);
  read_matrix(r, (prefix + "_weights").c_str(), g.weights, nv, nh);
}

}  // namespace

void save_model(std::ostream& out, const RbmModel& m) {
  out << "model\n";
  out << "visible " << m.n_visible << ' ' << kind_name(m.visible_kind) << '\n';
  out << "hidden " << m.n_hidden << " bernoulli\n";
  write_vector(out, "visible_loc", m.visible_loc);
  write_vector(out, "visible_log_scale", m.visible_log_scale);
  write_vector(out, "hidden_bias", m.hidden_bias);
  write_matrix(out, "weights", m.weights, m.n_visible, m.n_hidden);
  out << "end_model\n";
}

namespace {

RbmModel load_model_tokens(TokenReader& r) {
  r.expect("model");
  r.expect("visible");
  const int nv = static_cast<int>(r.integer("visible count"));
  const LayerKind kind = kind_from(r.next("visible kind"));
  r.expect("hidden");
  const int nh = static_cast<int>(r.integer("hidden count"));
  const std::string hidden_kind = r.next("hidden kind");
  if (hidden_kind != "bernoulli") {
    throw std::runtime_error("checkpoint: hidden layer must be bernoulli");
  }
  if (nv < 1 || nh < 1) {
    throw std::runtime_error("checkpoint: bad layer sizes");
  }
  RbmModel m = RbmModel::make(nv, nh, kind);
  read_vector(r, "visible_loc", m.visible_loc, nv);
  read_vector(r, "visible_log_scale", m.visible_log_scale, nv);
  read_vector(r, "hidden_bias", m.hidden_bias, nh);
  read_matrix(r, "weights", m.weights, nv, nh);
  r.expect("end_model");
  return m;
}

}  // namespace

RbmModel load_model(std::istream& in) {
  TokenReader r(in);
  return load_model_tokens(r);
}

void save_checkpoint(const std::string& path, const TrainState& state) {
  std::ostringstream out;
  const RbmModel& m = state.model;
  out << kVersionLine << '\n';
  out << "epochs_done " << state.epochs_done << '\n';
  save_model(out, m);

  out << "adam\n";
  out << "step " << state.adam.step << '\n';
  write_bundle(out, "m", state.adam.m, m.n_visible, m.n_hidden);
  write_bundle(out, "v", state.adam.v, m.n_visible, m.n_hidden);
  out << "end_adam\n";

  out << "population " << state.population.size() << '\n';
  for (const Particle& p : state.population.particles) {
    out << "particle " << format_double(p.beta) << ' '
        << format_u64(p.state_rng.state()) << ' '
        << format_u64(p.beta_rng.state()) << '\n';
    write_vector(out, "v", p.state.v);
    write_vector(out, "h", p.state.h);
  }

  out << "shuffle_rng " << format_u64(state.shuffle_rng.state()) << '\n';

  out << "cache " << state.cache.dim << ' ' << state.cache.n_data << ' '
      << state.cache.n_model << ' ' << state.cache.k << ' '
      << format_double(state.cache.epsilon) << '\n';
  for (int j = 0; j < state.cache.n_data; ++j) {
    write_vector(out, "data", state.cache.data_row(j));
  }
  for (int j = 0; j < state.cache.n_model; ++j) {
    write_vector(out, "model_pt", state.cache.model_row(j));
  }
  out << "end\n";

  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("checkpoint: cannot open " + path);
  const std::string text = out.str();
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f) throw std::runtime_error("checkpoint: write failed for " + path);
}

TrainState load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("checkpoint: cannot open " + path);
  std::string version_line;
  std::getline(f, version_line);
  if (!version_line.empty() && version_line.back() == '\r') {
    version_line.pop_back();
  }
  if (version_line != kVersionLine) {
    throw std::runtime_error("checkpoint: version mismatch in " + path +
                             " (expected '" + kVersionLine + "', got '" +
                             version_line + "')");
  }
  TokenReader r(f);
  TrainState state;
  r.expect("epochs_done");
  state.epochs_done = static_cast<int>(r.integer("epochs_done"));
  state.model = load_model_tokens(r);
  const int nv = state.model.n_visible;
  const int nh = state.model.n_hidden;

  r.expect("adam");
  r.expect("step");
  state.adam.step = r.integer("adam step");
  read_bundle(r, "m", state.adam.m, nv, nh);
  read_bundle(r, "v", state.adam.v, nv, nh);
  r.expect("end_adam");

  r.expect("population");
  const int m = static_cast<int>(r.integer("population size"));
  if (m < 1) throw std::runtime_error("checkpoint: empty population");
  state.population.particles.resize(m);
  for (int p = 0; p < m; ++p) {
    Particle& pt = state.population.particles[p];
    r.expect("particle");
    pt.beta = r.number("beta");
    pt.state_rng.set_state(r.u64("state_rng"));
    pt.beta_rng.set_state(r.u64("beta_rng"));
    read_vector(r, "v", pt.state.v, nv);
    read_vector(r, "h", pt.state.h, nh);
  }

  r.expect("shuffle_rng");
  state.shuffle_rng.set_state(r.u64("shuffle_rng"));

  r.expect("cache");
  const int dim = static_cast<int>(r.integer("cache dim"));
  const int n_data = static_cast<int>(r.integer("cache n_data"));
  const int n_model = static_cast<int>(r.integer("cache n_model"));
  const int k = static_cast<int>(r.integer("cache k"));
  const double epsilon = r.number("cache epsilon");
  std::vector<double> data_rows(static_cast<std::size_t>(n_data) * dim);
  std::vector<double> model_rows(static_cast<std::size_t>(n_model) * dim);
  for (int j = 0; j < n_data; ++j) {
    std::vector<double> row;
    read_vector(r, "data", row, dim);
    std::copy(row.begin(), row.end(),
              data_rows.begin() + static_cast<std::size_t>(j) * dim);
  }
  for (int j = 0; j < n_model; ++j) {
    std::vector<double> row;
    read_vector(r, "model_pt", row, dim);
    std::copy(row.begin(), row.end(),
              model_rows.begin() + static_cast<std::size_t>(j) * dim);
  }
  if (n_data + n_model > 0) {
    update_cache(state.cache, data_rows.data(), n_data, model_rows.data(),
                 n_model, dim);
  } else {
    state.cache = CriticCache{};
    state.cache.dim = dim;
  }
  state.cache.k = k;
  state.cache.epsilon = epsilon;
  r.expect("end");
  return state;
}

}  // namespace beam
