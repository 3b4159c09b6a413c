#include "snnts/persistence.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "snnts/errors.hpp"

namespace snnts {

namespace fs = std::filesystem;

std::string format_real(double value) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return {buf, end};
}

void write_text(const fs::path& path, std::string_view text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << text;
    if (!out) throw DataError("failed writing " + path.string());
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(sep, start);
        out.push_back(line.substr(start, pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::vector<std::string_view> tokens(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        auto j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

template <typename T>
std::optional<T> parse_number(std::string_view text) {
    T value{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
    return value;
}

// Line cursor over a text document that tracks 1-based line numbers.
class Lines {
public:
    Lines(std::string_view text, std::size_t first_line = 1) : text_(text), line_(first_line - 1) {}

    bool next(std::vector<std::string_view>& toks) {
        while (pos_ <= text_.size()) {
            auto end = text_.find('\n', pos_);
            if (end == std::string_view::npos) end = text_.size();
            auto line = text_.substr(pos_, end - pos_);
            pos_ = end + 1;
            ++line_;
            toks = tokens(line);
            if (!toks.empty() && toks.front().front() != '#') return true;
        }
        return false;
    }

    std::size_t line() const { return line_; }
    std::size_t offset() const { return pos_; }

    [[noreturn]] void fail(const std::string& what) const { throw FormatError(what, line_); }

    template <typename T>
    T number(std::string_view tok, const char* what) const {
        auto v = parse_number<T>(tok);
        if (!v) fail(std::string("bad ") + what + " '" + std::string(tok) + "'");
        return *v;
    }

    void arity(const std::vector<std::string_view>& toks, std::size_t n) const {
        if (toks.size() != n)
            fail("'" + std::string(toks.front()) + "' expects " + std::to_string(n - 1) + " fields");
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_;
};

int ranged(const Lines& lines, std::string_view tok, const char* what, int lo, int hi) {
    const auto v = lines.number<int>(tok, what);
    if (v < lo || v > hi) lines.fail(std::string(what) + " out of range: " + std::string(tok));
    return v;
}

void append_network(std::ostringstream& os, const NetworkFile& file) {
    Network net = file.network;
    net.canonicalize();
    os << "snnts-network " << kNetworkFormatVersion << '\n';
    if (file.encoder) {
        const auto& e = *file.encoder;
        os << "encoder " << to_string(e.scheme) << ' ' << e.tau << ' ' << e.bins << ' ' << (e.flip_flop ? 1 : 0)
           << '\n';
        for (const auto& r : e.ranges) os << "range " << format_real(r.min) << ' ' << format_real(r.max) << '\n';
    }
    const auto& p = file.provenance;
    os << "provenance " << (p.seed ? std::to_string(*p.seed) : "-") << ' '
       << (p.epoch ? std::to_string(*p.epoch) : "-") << ' ' << (p.fitness ? format_real(*p.fitness) : "-") << '\n';
    os << "inputs";
    for (auto id : net.input_order) os << ' ' << id.value;
    os << "\noutput " << net.output.value << '\n';
    for (const auto& n : net.neurons)
        os << "neuron " << n.id.value << ' ' << to_string(n.kind) << ' ' << n.threshold << ' ' << n.axon_delay << '\n';
    for (const auto& s : net.synapses) os << "synapse " << s.pre.value << ' ' << s.post.value << ' ' << s.weight << '\n';
    os << "end\n";
}

// Parses one network document starting at the cursor; stops after "end".
NetworkFile parse_network_doc(Lines& lines) {
    std::vector<std::string_view> t;
    if (!lines.next(t)) lines.fail("empty network document");
    if (t.front() != "snnts-network") lines.fail("not a network file (missing 'snnts-network' header)");
    lines.arity(t, 2);
    if (lines.number<int>(t[1], "version") != kNetworkFormatVersion)
        lines.fail("unsupported network format version " + std::string(t[1]));

    NetworkFile file;
    bool have_output = false, have_inputs = false;
    while (true) {
        if (!lines.next(t)) lines.fail("network document is missing 'end'");
        const auto key = t.front();
        if (key == "end") break;
        if (key == "encoder") {
            lines.arity(t, 5);
            EncoderSpec e;
            try {
                e.scheme = parse_encoder_scheme(std::string(t[1]));
            } catch (const std::invalid_argument& ex) {
                lines.fail(ex.what());
            }
            e.tau = lines.number<int>(t[2], "tau");
            e.bins = lines.number<int>(t[3], "bins");
            e.flip_flop = lines.number<int>(t[4], "flip_flop") != 0;
            file.encoder = e;
        } else if (key == "range") {
            lines.arity(t, 3);
            if (!file.encoder) lines.fail("'range' before 'encoder'");
            file.encoder->ranges.push_back({lines.number<double>(t[1], "range min"),
                                            lines.number<double>(t[2], "range max")});
        } else if (key == "provenance") {
            lines.arity(t, 4);
            if (t[1] != "-") file.provenance.seed = lines.number<std::uint64_t>(t[1], "seed");
            if (t[2] != "-") file.provenance.epoch = lines.number<int>(t[2], "epoch");
            if (t[3] != "-") file.provenance.fitness = lines.number<double>(t[3], "fitness");
        } else if (key == "inputs") {
            have_inputs = true;
            for (std::size_t i = 1; i < t.size(); ++i)
                file.network.input_order.push_back({ranged(lines, t[i], "neuron id", 0, kMaxNeuronId)});
        } else if (key == "output") {
            lines.arity(t, 2);
            have_output = true;
            file.network.output = {ranged(lines, t[1], "neuron id", 0, kMaxNeuronId)};
        } else if (key == "neuron") {
            lines.arity(t, 5);
            Neuron n;
            n.id = {ranged(lines, t[1], "neuron id", 0, kMaxNeuronId)};
            auto kind = parse_neuron_kind(std::string(t[2]));
            if (!kind) lines.fail("unknown neuron kind '" + std::string(t[2]) + "'");
            n.kind = *kind;
            n.threshold = ranged(lines, t[3], "threshold", kMinThreshold, kMaxThreshold);
            n.axon_delay = ranged(lines, t[4], "axon delay", kMinDelay, kMaxDelay);
            file.network.neurons.push_back(n);
        } else if (key == "synapse") {
            lines.arity(t, 4);
            Synapse s;
            s.pre = {ranged(lines, t[1], "neuron id", 0, kMaxNeuronId)};
            s.post = {ranged(lines, t[2], "neuron id", 0, kMaxNeuronId)};
            s.weight = ranged(lines, t[3], "weight", kMinWeight, kMaxWeight);
            file.network.synapses.push_back(s);
        } else {
            lines.fail("unknown record '" + std::string(key) + "'");
        }
    }
    if (!have_inputs || !have_output) lines.fail("network document lacks 'inputs' or 'output'");
    file.network.canonicalize();
    const auto violations = validate(file.network);
    if (!violations.empty()) lines.fail("invalid network: " + violations.front());
    if (file.encoder) {
        try {
            file.encoder->check();
        } catch (const std::invalid_argument& ex) {
            lines.fail(ex.what());
        }
        if (file.encoder->input_count() != file.network.input_order.size())
            lines.fail("encoder input count does not match the network's inputs");
    }
    return file;
}

}  // namespace

std::string format_network(const NetworkFile& file) {
    std::ostringstream os;
    append_network(os, file);
    return os.str();
}

NetworkFile parse_network(std::string_view text) {
    Lines lines(text);
    auto file = parse_network_doc(lines);
    std::vector<std::string_view> t;
    if (lines.next(t)) lines.fail("trailing content after 'end'");
    return file;
}

void save_network(const fs::path& path, const NetworkFile& file) { write_text(path, format_network(file)); }

NetworkFile load_network(const fs::path& path) {
    try {
        return parse_network(read_text(path));
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

std::string format_population(std::span<const NetworkFile> networks) {
    std::ostringstream os;
    os << "snnts-population " << kPopulationFormatVersion << ' ' << networks.size() << '\n';
    for (const auto& n : networks) append_network(os, n);
    return os.str();
}

std::vector<NetworkFile> parse_population(std::string_view text) {
    const auto first_nl = text.find('\n');
    const auto header = tokens(text.substr(0, first_nl));
    if (header.size() != 3 || header[0] != "snnts-population") throw FormatError("not a population file", 1);
    if (parse_number<int>(header[1]) != kPopulationFormatVersion)
        throw FormatError("unsupported population format version", 1);
    const auto count = parse_number<std::size_t>(header[2]);
    if (!count) throw FormatError("bad population count", 1);

    const auto body = first_nl == std::string_view::npos ? std::string_view{} : text.substr(first_nl + 1);
    Lines lines(body, 2);
    std::vector<NetworkFile> out;
    for (std::size_t i = 0; i < *count; ++i) out.push_back(parse_network_doc(lines));
    std::vector<std::string_view> t;
    if (lines.next(t)) lines.fail("more networks than the header declares");
    return out;
}

void save_population(const fs::path& path, std::span<const NetworkFile> networks) {
    write_text(path, format_population(networks));
}

std::vector<NetworkFile> load_population(const fs::path& path) {
    try {
        return parse_population(read_text(path));
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void save_ensemble(const fs::path& path, const EnsembleFile& file) {
    file.ensemble.check();
    std::ostringstream os;
    os << "snnts-ensemble " << kEnsembleFormatVersion << '\n';
    os << "vote " << to_string(file.ensemble.vote) << '\n';
    os << "window " << file.ensemble.window << '\n';
    for (std::size_t i = 0; i < file.ensemble.members.size(); ++i) {
        const auto name = path.stem().string() + ".member" + std::to_string(i) + ".net";
        save_network(path.parent_path() / name, {file.ensemble.members[i].network, file.encoder, {}});
        os << "member " << file.ensemble.members[i].theta << ' ' << name << '\n';
    }
    os << "end\n";
    write_text(path, os.str());
}

EnsembleFile load_ensemble(const fs::path& path) {
    const auto text = read_text(path);
    Lines lines(text);
    std::vector<std::string_view> t;
    if (!lines.next(t) || t.front() != "snnts-ensemble") lines.fail("not an ensemble file");
    lines.arity(t, 2);
    if (lines.number<int>(t[1], "version") != kEnsembleFormatVersion) lines.fail("unsupported ensemble format version");

    EnsembleFile file;
    std::optional<EncoderSpec> encoder;
    while (true) {
        if (!lines.next(t)) lines.fail("ensemble file is missing 'end'");
        if (t.front() == "end") break;
        if (t.front() == "vote") {
            lines.arity(t, 2);
            try {
                file.ensemble.vote = parse_vote(std::string(t[1]));
            } catch (const std::invalid_argument& e) {
                lines.fail(e.what());
            }
        } else if (t.front() == "window") {
            lines.arity(t, 2);
            file.ensemble.window = lines.number<int>(t[1], "window");
        } else if (t.front() == "member") {
            lines.arity(t, 3);
            const int theta = lines.number<int>(t[1], "theta");
            auto member = load_network(path.parent_path() / std::string(t[2]));
            if (!member.encoder) lines.fail("member network has no encoder");
            if (encoder && !(*encoder == *member.encoder)) lines.fail("members disagree on the encoder");
            encoder = member.encoder;
            file.ensemble.members.push_back({std::move(member.network), theta});
        } else {
            lines.fail("unknown record '" + std::string(t.front()) + "'");
        }
    }
    if (!encoder) lines.fail("ensemble has no members");
    file.encoder = *encoder;
    try {
        file.ensemble.check();
    } catch (const std::invalid_argument& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    return file;
}

std::string format_run_csv(const Run& run) {
    std::ostringstream os;
    os << 't';
    for (std::size_t v = 0; v < run.variables; ++v) os << ",x_" << v + 1;
    os << ",label\n";
    for (std::size_t t = 0; t < run.steps(); ++t) {
        os << t;
        for (double x : run.row(t)) os << ',' << format_real(x);
        os << ',' << static_cast<int>(run.labels[t]) << '\n';
    }
    return os.str();
}

Run parse_run_csv(std::string_view text, std::size_t expected_variables, double stride_seconds,
                  const std::string& id) {
    Run run;
    run.id = id;
    run.stride_seconds = stride_seconds;
    std::size_t line_no = 0, pos = 0;
    std::optional<long long> last_t;
    std::size_t columns = 0;
    while (pos < text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        auto line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        const auto cells = split(line, ',');
        if (line_no == 1) {
            if (cells.size() < 3 || cells.front() != "t" || cells.back() != "label")
                throw FormatError("run header must be t,x_1..x_n,label", line_no);
            columns = cells.size();
            run.variables = columns - 2;
            if (expected_variables && run.variables != expected_variables) {
                throw FormatError("run has " + std::to_string(run.variables) + " variables, manifest declares " +
                                      std::to_string(expected_variables),
                                  line_no);
            }
            continue;
        }
        if (cells.size() != columns)
            throw FormatError("expected " + std::to_string(columns) + " columns, found " + std::to_string(cells.size()),
                              line_no);
        const auto t = parse_number<long long>(cells.front());
        if (!t) throw FormatError("bad step index", line_no);
        if (last_t && *t <= *last_t) throw FormatError("step index is not increasing", line_no);
        last_t = t;
        for (std::size_t c = 1; c + 1 < cells.size(); ++c) {
            const auto v = parse_number<double>(cells[c]);
            if (!v || !std::isfinite(*v)) throw FormatError("bad value '" + std::string(cells[c]) + "'", line_no);
            run.observations.push_back(*v);
        }
        const auto label = parse_number<int>(cells.back());
        if (!label || (*label != 0 && *label != 1)) throw FormatError("label outside {0,1}", line_no);
        run.labels.push_back(static_cast<std::uint8_t>(*label));
    }
    if (columns == 0) throw FormatError("run file is empty");
    return run;
}

void save_dataset(const fs::path& dir, const Dataset& data) {
    fs::create_directories(dir);
    nlohmann::json manifest;
    manifest["format"] = "snnts-dataset";
    manifest["version"] = kDatasetFormatVersion;
    manifest["variables"] = data.variables();
    manifest["stride_seconds"] = data.stride_seconds;
    manifest["ranges"] = nlohmann::json::array();
    for (const auto& r : data.ranges) manifest["ranges"].push_back({{"min", r.min}, {"max", r.max}});
    manifest["runs"] = nlohmann::json::array();
    for (const auto& run : data.runs) {
        nlohmann::json entry{{"id", run.id},
                             {"file", run.id + ".csv"},
                             {"steps", run.steps()},
                             {"positives", run.positives()}};
        if (run.snr) entry["snr"] = *run.snr;
        manifest["runs"].push_back(entry);
        write_text(dir / (run.id + ".csv"), format_run_csv(run));
    }
    write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

Dataset load_dataset(const fs::path& dir) {
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(read_text(dir / "manifest.json"));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError((dir / "manifest.json").string() + ": " + e.what());
    }
    try {
        if (manifest.at("format") != "snnts-dataset") throw DataError("manifest is not an snnts dataset");
        if (manifest.at("version") != kDatasetFormatVersion) throw DataError("unsupported dataset format version");
        Dataset data;
        const auto n = manifest.at("variables").get<std::size_t>();
        data.stride_seconds = manifest.at("stride_seconds").get<double>();
        if (!(data.stride_seconds > 0.0)) throw DataError("stride_seconds must be positive");
        for (const auto& r : manifest.at("ranges"))
            data.ranges.push_back({r.at("min").get<double>(), r.at("max").get<double>()});
        if (data.ranges.size() != n) throw DataError("manifest declares " + std::to_string(n) + " variables but " +
                                                     std::to_string(data.ranges.size()) + " ranges");
        for (const auto& entry : manifest.at("runs")) {
            const auto id = entry.at("id").get<std::string>();
            const auto file = dir / entry.at("file").get<std::string>();
            Run run;
            try {
                run = parse_run_csv(read_text(file), n, data.stride_seconds, id);
            } catch (const FormatError& e) {
                throw FormatError(file.string() + ": " + e.what());
            }
            if (run.steps() != entry.at("steps").get<std::size_t>())
                throw DataError(file.string() + ": step count disagrees with the manifest");
            if (entry.contains("snr")) run.snr = entry.at("snr").get<double>();
            run.check();
            data.runs.push_back(std::move(run));
        }
        return data;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError((dir / "manifest.json").string() + ": " + e.what());
    }
}

std::string format_roc_csv(const RocCurve& roc) {
    std::ostringstream os;
    os << "theta,far_per_hour,tpr\n";
    for (const auto& p : roc.points)
        os << p.theta << ',' << format_real(p.far_per_hour) << ',' << format_real(p.tpr) << '\n';
    return os.str();
}

std::string format_history_csv(std::span<const EpochRecord> history) {
    std::ostringstream os;
    os << "epoch,best_fitness,mean_fitness,best_neurons,best_synapses\n";
    for (const auto& h : history)
        os << h.epoch << ',' << format_real(h.best_fitness) << ',' << format_real(h.mean_fitness) << ','
           << h.best_neurons << ',' << h.best_synapses << '\n';
    return os.str();
}

std::string format_trace_csv(const std::string& run_id, const StepTrace& trace, std::span<const std::uint8_t> labels) {
    std::ostringstream os;
    os << "run_id,t,z,y,label\n";
    for (std::size_t t = 0; t < trace.z.size(); ++t)
        os << run_id << ',' << t << ',' << trace.z[t] << ',' << static_cast<int>(trace.y[t]) << ','
           << (t < labels.size() ? static_cast<int>(labels[t]) : 0) << '\n';
    return os.str();
}

std::string format_raster_csv(const SpikeRaster& raster) {
    std::ostringstream os;
    os << "neuron_id,cycle\n";
    for (const auto& [id, cycles] : raster.fired)
        for (int c : cycles) os << id << ',' << c << '\n';
    return os.str();
}

std::string format_report(const EvalReport& r, const std::string& title, int theta, int window) {
    nlohmann::json j;
    j["title"] = title;
    j["mode"] = to_string(r.mode);
    j["theta"] = theta;
    j["window_steps"] = window;
    j["confusion"] = {{"tp", r.cm.tp}, {"tn", r.cm.tn}, {"fp", r.cm.fp}, {"fn", r.cm.fn}};
    j["mcc"] = r.mcc;
    j["f1"] = r.f1;
    j["precision"] = r.precision;
    j["tpr"] = r.tpr;
    j["fpr"] = r.fpr;
    j["far_per_hour"] = r.far_per_hour;
    j["background_hours"] = r.background_hours;
    return j.dump(2) + "\n";
}

}  // namespace snnts
