#include "desn/io.hpp"

#include "desn/errors.hpp"

#include <fmt/format.h>

#include <charconv>
#include <fstream>
#include <sstream>

namespace desn {

namespace fs = std::filesystem;

std::string format_real(double v) { return fmt::format("{:.17g}", v); }

namespace {

double parse_real(std::string_view token, std::string_view context) {
    while (!token.empty() && token.front() == ' ') token.remove_prefix(1);
    while (!token.empty() && (token.back() == ' ' || token.back() == '\r')) token.remove_suffix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc{} || ptr != token.data() + token.size()) {
        throw data_error(fmt::format("{}: cannot parse '{}' as a number", context, token));
    }
    return v;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = line.find(sep, start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error(fmt::format("cannot open '{}' for writing", path.string()));
    return out;
}

std::ifstream open_in(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error(fmt::format("cannot open '{}' for reading", path.string()));
    return in;
}

}  // namespace

void write_matrix_csv(std::ostream& out, const Eigen::Ref<const Matrix>& m) {
    out << "# matrix " << m.rows() << ' ' << m.cols() << '\n';
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) {
            if (j) out << ',';
            out << format_real(m(i, j));
        }
        out << '\n';
    }
}

Matrix read_matrix_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw data_error("matrix CSV is empty");
    std::istringstream header(line);
    std::string hash, tag;
    Index rows = -1, cols = -1;
    if (!(header >> hash >> tag >> rows >> cols) || hash != "#" || tag != "matrix" || rows < 0 || cols < 0) {
        throw data_error(fmt::format("bad matrix CSV header '{}'", line));
    }
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        if (!std::getline(in, line)) throw data_error(fmt::format("matrix CSV ends after {} of {} rows", i, rows));
        const auto cells = split(line, ',');
        if (static_cast<Index>(cells.size()) != cols) {
            throw data_error(fmt::format("matrix CSV row {} has {} values, expected {}", i, cells.size(), cols));
        }
        for (Index j = 0; j < cols; ++j) m(i, j) = parse_real(cells[static_cast<std::size_t>(j)], "matrix CSV");
    }
    return m;
}

void write_matrix_file(const fs::path& path, const Eigen::Ref<const Matrix>& m) {
    auto out = open_out(path);
    write_matrix_csv(out, m);
}

Matrix read_matrix_file(const fs::path& path) {
    auto in = open_in(path);
    return read_matrix_csv(in);
}

void write_dataset_csv(std::ostream& out, const NarmaSeries& series, const NarmaConfig& config) {
    out << "# dataset=narma\n";
    out << "# length=" << config.length << '\n';
    out << "# tau=" << config.tau << '\n';
    out << "# seed=" << config.seed << '\n';
    out << "# rng=" << Rng::version << '\n';
    out << "s,y\n";
    for (Index t = 0; t < series.input.size(); ++t) {
        out << format_real(series.input(t)) << ',' << format_real(series.output(t)) << '\n';
    }
}

NarmaSeries read_dataset_csv(std::istream& in) {
    std::vector<double> s, y;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        if (!header_seen && (line == "s,y" || line == "s,y\r")) {
            header_seen = true;
            continue;
        }
        const auto cells = split(line, ',');
        if (cells.size() != 2) throw data_error(fmt::format("dataset line {}: expected 2 columns", line_no));
        const auto ctx = fmt::format("dataset line {}", line_no);
        s.push_back(parse_real(cells[0], ctx));
        y.push_back(parse_real(cells[1], ctx));
    }
    if (s.empty()) throw data_error("dataset has no rows");
    NarmaSeries out{Vector(static_cast<Index>(s.size())), Vector(static_cast<Index>(y.size()))};
    for (std::size_t i = 0; i < s.size(); ++i) {
        out.input(static_cast<Index>(i)) = s[i];
        out.output(static_cast<Index>(i)) = y[i];
    }
    return out;
}

void KeyValues::set(std::string key, std::string value) { entries_.emplace_back(std::move(key), std::move(value)); }

const std::string* KeyValues::find(std::string_view key) const {
    for (const auto& [k, v] : entries_) {
        if (k == key) return &v;
    }
    return nullptr;
}

const std::string& KeyValues::at(std::string_view key) const {
    if (const auto* v = find(key)) return *v;
    throw data_error(fmt::format("missing key '{}'", key));
}

void write_key_values(std::ostream& out, const KeyValues& kv) {
    for (const auto& [k, v] : kv.entries()) out << k << '=' << v << '\n';
}

KeyValues read_key_values(std::istream& in) {
    KeyValues kv;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw data_error(fmt::format("expected key=value, got '{}'", line));
        kv.set(line.substr(0, eq), line.substr(eq + 1));
    }
    return kv;
}

void write_mc_report_csv(std::ostream& out, const McReport& report) {
    out << "# architecture=" << to_string(report.architecture.kind) << '\n';
    out << "# L=" << report.architecture.layers << '\n';
    out << "# N=" << report.architecture.reservoir_size << '\n';
    out << "# r=" << format_real(report.architecture.cycle_weight) << '\n';
    out << "# topology=cycle\n# activation=identity\n";
    out << "# seed=" << report.architecture.seed << '\n';
    out << "# length=" << report.probe.length << '\n';
    out << "# input_variance=" << format_real(report.probe.input_variance) << '\n';
    out << "# kmax=" << report.probe.max_delay << '\n';
    out << "# washout=" << report.probe.washout << '\n';
    out << "# lambda=" << format_real(report.probe.ridge) << '\n';
    out << "# train_rows=" << report.train_rows << '\n';
    out << "# eval_rows=" << report.eval_rows << '\n';
    out << "# empirical_C=" << format_real(report.empirical) << '\n';
    out << "# theoretical_C=" << (report.theoretical ? format_real(*report.theoretical) : std::string{"absent"})
        << '\n';
    out << "k,C_k,degenerate\n";
    for (const auto& d : report.per_delay) {
        out << d.delay << ',' << format_real(d.capacity) << ',' << (d.degenerate ? 1 : 0) << '\n';
    }
}

void write_sweep_csv(std::ostream& out, const SweepResult& result, SweptParameter parameter, bool timing) {
    out << "architecture,parameter_name,parameter,seed,train_nrmse,test_nrmse,error";
    if (timing) out << ",wall_ms";
    out << '\n';
    for (const auto& row : result.rows) {
        out << to_string(row.architecture) << ',' << to_string(parameter) << ',' << format_real(row.parameter) << ','
            << row.seed << ',';
        if (row.ok()) {
            out << format_real(row.train_nrmse) << ',' << format_real(row.test_nrmse) << ',';
        } else {
            std::string msg = row.error;
            for (char& c : msg) {
                if (c == ',' || c == '\n') c = ';';
            }
            out << ",," << msg;
        }
        if (timing) out << ',' << fmt::format("{:.3f}", row.wall_ms);
        out << '\n';
    }
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows, SweptParameter parameter) {
    out << "architecture,parameter_name,parameter,trials,failed,mean_train_nrmse,std_train_nrmse,"
           "mean_test_nrmse,std_test_nrmse\n";
    for (const auto& s : rows) {
        out << to_string(s.architecture) << ',' << to_string(parameter) << ',' << format_real(s.parameter) << ','
            << s.succeeded << ',' << s.failed << ',' << format_real(s.mean_train) << ','
            << format_real(s.std_train) << ',' << format_real(s.mean_test) << ',' << format_real(s.std_test)
            << '\n';
    }
}

std::vector<fs::path> save_model(const fs::path& dir, const Model& model) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw data_error(fmt::format("cannot create '{}': {}", dir.string(), ec.message()));

    KeyValues kv;
    kv.set("format", "desn-model-v1");
    kv.set("architecture", std::string{to_string(model.architecture())});
    kv.set("layers", std::to_string(model.layers()));
    kv.set("rng", std::string{Rng::version});

    std::vector<fs::path> written{dir / "model.manifest"};
    const auto& reservoirs = model.reservoirs();
    for (std::size_t l = 0; l < reservoirs.size(); ++l) {
        const Esn& esn = reservoirs[l];
        const EsnConfig& c = esn.config();
        const std::string p = fmt::format("reservoir.{}.", l);
        kv.set(p + "seed", std::to_string(c.seed));
        kv.set(p + "N", std::to_string(c.reservoir_size));
        kv.set(p + "K", std::to_string(c.input_dim));
        kv.set(p + "M", std::to_string(c.output_dim));
        kv.set(p + "topology", std::string{to_string(c.topology)});
        kv.set(p + "spectral_radius", c.spectral_radius ? format_real(*c.spectral_radius) : std::string{});
        kv.set(p + "cycle_weight", c.cycle_weight ? format_real(*c.cycle_weight) : std::string{});
        kv.set(p + "activation", std::string{to_string(c.activation)});
        kv.set(p + "lambda", format_real(c.ridge));
        const auto emit = [&](const char* name, const Matrix& m) {
            const std::string file = fmt::format("reservoir{}_{}.csv", l, name);
            write_matrix_file(dir / file, m);
            kv.set(p + name, file);
            written.push_back(dir / file);
        };
        emit("V", esn.input_weights());
        emit("W", esn.reservoir_weights());
        if (esn.trained()) emit("U", *esn.readout_weights());
    }
    auto out = open_out(dir / "model.manifest");
    write_key_values(out, kv);
    return written;
}

Model load_model(const fs::path& manifest) {
    auto in = open_in(manifest);
    const KeyValues kv = read_key_values(in);
    if (kv.at("format") != "desn-model-v1") throw data_error("unsupported model format");
    const Architecture arch = parse_architecture(kv.at("architecture"));
    const std::size_t layers = std::stoul(kv.at("layers"));
    const fs::path dir = manifest.parent_path();

    std::vector<Esn> reservoirs;
    for (std::size_t l = 0; l < layers; ++l) {
        const std::string p = fmt::format("reservoir.{}.", l);
        EsnConfig c;
        c.seed = std::stoull(kv.at(p + "seed"));
        c.reservoir_size = std::stol(kv.at(p + "N"));
        c.input_dim = std::stol(kv.at(p + "K"));
        c.output_dim = std::stol(kv.at(p + "M"));
        c.topology = parse_topology(kv.at(p + "topology"));
        const std::string& sr = kv.at(p + "spectral_radius");
        const std::string& cw = kv.at(p + "cycle_weight");
        c.spectral_radius = sr.empty() ? std::nullopt : std::optional<double>{parse_real(sr, "manifest")};
        c.cycle_weight = cw.empty() ? std::nullopt : std::optional<double>{parse_real(cw, "manifest")};
        c.activation = parse_activation(kv.at(p + "activation"));
        c.ridge = parse_real(kv.at(p + "lambda"), "manifest");
        Esn esn{c, read_matrix_file(dir / kv.at(p + "V")), read_matrix_file(dir / kv.at(p + "W"))};
        if (const auto* u = kv.find(p + "U")) esn.set_readout(read_matrix_file(dir / *u));
        reservoirs.push_back(std::move(esn));
    }
    if (arch == Architecture::Series) return Model{SeriesEsn{std::move(reservoirs)}};
    return Model{arch, ParallelEsn{std::move(reservoirs)}};
}

}  // namespace desn
