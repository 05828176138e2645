#include "qrm/scenario.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "qrm/errors.hpp"

namespace qrm {

namespace {

std::string fmt_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(const std::string& field, const std::string& v)
{
    std::size_t pos = 0;
    double out = 0.0;
    try {
        out = std::stod(v, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos == 0 || v.find_first_not_of(" \t", pos) != std::string::npos)
        fail(ErrorKind::ParseError, "field " + field + ": expected a number, got '" + v + "'");
    return out;
}

long long parse_int(const std::string& field, const std::string& v)
{
    std::size_t pos = 0;
    long long out = 0;
    try {
        out = std::stoll(v, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos == 0 || v.find_first_not_of(" \t", pos) != std::string::npos)
        fail(ErrorKind::ParseError, "field " + field + ": expected an integer, got '" + v + "'");
    return out;
}

std::vector<int> parse_list(const std::string& field, const std::string& v)
{
    std::string s = v;
    for (char& c : s)
        if (c == ',')
            c = ' ';
    std::istringstream in(s);
    std::vector<int> out;
    std::string tok;
    while (in >> tok)
        out.push_back(int(parse_int(field, tok)));
    return out;
}

std::string fmt_list(const std::vector<int>& v)
{
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i)
        out += (i ? " " : "") + std::to_string(v[i]);
    return out;
}

struct Field {
    std::string section;
    std::string key;
    std::function<std::string(const Scenario&)> get;
    std::function<void(Scenario&, const std::string&)> set;

    std::string path() const { return section.empty() ? key : section + "." + key; }
};

template <class Get>
Field real_field(std::string sec, std::string key, Get g)
{
    const std::string path = sec + "." + key;
    return {sec, key, [g](const Scenario& s) { return fmt_double(g(const_cast<Scenario&>(s))); },
            [g, path](Scenario& s, const std::string& v) { g(s) = parse_double(path, v); }};
}

template <class Get>
Field int_field(std::string sec, std::string key, Get g)
{
    const std::string path = sec + "." + key;
    return {sec, key, [g](const Scenario& s) { return std::to_string(g(const_cast<Scenario&>(s))); },
            [g, path](Scenario& s, const std::string& v) {
                using T = std::remove_reference_t<decltype(g(s))>;
                const long long x = parse_int(path, v);
                if constexpr (std::is_unsigned_v<T>) {
                    if (x < 0)
                        fail(ErrorKind::ParseError, "field " + path + ": must be non-negative");
                }
                g(s) = T(x);
            }};
}

template <class Get>
Field list_field(std::string sec, std::string key, Get g)
{
    const std::string path = sec + "." + key;
    return {sec, key, [g](const Scenario& s) { return fmt_list(g(const_cast<Scenario&>(s))); },
            [g, path](Scenario& s, const std::string& v) { g(s) = parse_list(path, v); }};
}

const std::vector<Field>& fields()
{
    static const std::vector<Field> table = [] {
        std::vector<Field> f;
        f.push_back({"", "name", [](const Scenario& s) { return s.name; },
                     [](Scenario& s, const std::string& v) { s.name = v; }});
        f.push_back({"", "kind", [](const Scenario& s) { return to_string(s.kind); },
                     [](Scenario& s, const std::string& v) { s.kind = parse_run_kind(v); }});

        f.push_back(real_field("model", "lambda", [](Scenario& s) -> double& { return s.model.lambda; }));
        f.push_back(real_field("model", "omega_c", [](Scenario& s) -> double& { return s.model.omega_c; }));
        f.push_back(real_field("model", "omega_e", [](Scenario& s) -> double& { return s.model.omega_e; }));
        f.push_back(real_field("model", "omega_g", [](Scenario& s) -> double& { return s.model.omega_g; }));
        f.push_back(real_field("model", "omega_b", [](Scenario& s) -> double& { return s.model.omega_b; }));

        f.push_back(int_field("space", "n_fock", [](Scenario& s) -> int& { return s.space.n_fock; }));
        f.push_back(int_field("space", "n_dressed", [](Scenario& s) -> int& { return s.n_dressed; }));

        f.push_back(real_field("pulses", "omega1", [](Scenario& s) -> double& { return s.pulses.omega1; }));
        f.push_back(real_field("pulses", "ratio", [](Scenario& s) -> double& { return s.pulses.ratio; }));
        f.push_back(real_field("pulses", "t1", [](Scenario& s) -> double& { return s.pulses.t1; }));
        f.push_back(real_field("pulses", "t2", [](Scenario& s) -> double& { return s.pulses.t2; }));
        f.push_back(real_field("pulses", "width", [](Scenario& s) -> double& { return s.pulses.width; }));
        f.push_back(real_field("pulses", "period", [](Scenario& s) -> double& { return s.pulses.period; }));
        f.push_back(int_field("pulses", "cycles", [](Scenario& s) -> int& { return s.pulses.cycles; }));

        f.push_back(int_field("target", "n", [](Scenario& s) -> int& { return s.target.n; }));
        f.push_back(int_field("target", "M", [](Scenario& s) -> int& { return s.target.M; }));
        f.push_back(int_field("target", "m", [](Scenario& s) -> int& { return s.target.m; }));
        f.push_back(real_field("target", "detuning", [](Scenario& s) -> double& { return s.target.detuning; }));

        f.push_back(real_field("dissipation", "kappa_a", [](Scenario& s) -> double& { return s.kappa.kappa_a; }));
        f.push_back(real_field("dissipation", "kappa_ge", [](Scenario& s) -> double& { return s.kappa.kappa_ge; }));
        f.push_back(real_field("dissipation", "kappa_bg", [](Scenario& s) -> double& { return s.kappa.kappa_bg; }));

        f.push_back(int_field("grid", "points_per_cycle", [](Scenario& s) -> int& { return s.grid.points_per_cycle; }));
        f.push_back(int_field("grid", "tau_points", [](Scenario& s) -> int& { return s.grid.tau_points; }));
        f.push_back(real_field("grid", "tau_max", [](Scenario& s) -> double& { return s.grid.tau_max; }));

        f.push_back(int_field("run", "seed", [](Scenario& s) -> std::uint64_t& { return s.run.seed; }));
        f.push_back(int_field("run", "n_traj", [](Scenario& s) -> int& { return s.run.n_traj; }));
        f.push_back(int_field("run", "threads", [](Scenario& s) -> int& { return s.run.threads; }));

        f.push_back(real_field("tolerances", "rtol_closed", [](Scenario& s) -> double& { return s.tol.rtol_closed; }));
        f.push_back(real_field("tolerances", "atol_closed", [](Scenario& s) -> double& { return s.tol.atol_closed; }));
        f.push_back(real_field("tolerances", "rtol_open", [](Scenario& s) -> double& { return s.tol.rtol_open; }));
        f.push_back(real_field("tolerances", "atol_open", [](Scenario& s) -> double& { return s.tol.atol_open; }));
        f.push_back(real_field("tolerances", "atol_trajectory",
                               [](Scenario& s) -> double& { return s.tol.atol_trajectory; }));
        f.push_back(real_field("tolerances", "truncation", [](Scenario& s) -> double& { return s.tol.truncation; }));
        f.push_back(real_field("tolerances", "adiabaticity", [](Scenario& s) -> double& { return s.tol.adiabaticity; }));
        f.push_back(real_field("tolerances", "rwa", [](Scenario& s) -> double& { return s.tol.rwa; }));

        f.push_back(real_field("sweep", "lambda_min", [](Scenario& s) -> double& { return s.sweep.lambda_min; }));
        f.push_back(real_field("sweep", "lambda_max", [](Scenario& s) -> double& { return s.sweep.lambda_max; }));
        f.push_back(int_field("sweep", "lambda_points", [](Scenario& s) -> int& { return s.sweep.lambda_points; }));
        f.push_back(list_field("sweep", "states", [](Scenario& s) -> std::vector<int>& { return s.sweep.states; }));
        f.push_back(list_field("sweep", "photons", [](Scenario& s) -> std::vector<int>& { return s.sweep.photons; }));
        return f;
    }();
    return table;
}

const Field* find_field(const std::string& section, const std::string& key)
{
    for (const auto& f : fields())
        if (f.section == section && f.key == key)
            return &f;
    return nullptr;
}

std::string trim(const std::string& s)
{
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos)
        return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

/// Drops trailing "; comment" / "# comment" from values, which the INI
/// reader keeps verbatim.
std::string strip_comment(const std::string& v)
{
    const auto pos = v.find_first_of(";#");
    return trim(pos == std::string::npos ? v : v.substr(0, pos));
}

} // namespace

std::string to_string(RunKind k)
{
    switch (k) {
    case RunKind::closed:
        return "closed";
    case RunKind::master:
        return "master";
    case RunKind::trajectory:
        return "trajectory";
    case RunKind::correlators:
        return "correlators";
    case RunKind::coeff_sweep:
        return "coeff-sweep";
    }
    return "?";
}

RunKind parse_run_kind(const std::string& s)
{
    for (RunKind k : {RunKind::closed, RunKind::master, RunKind::trajectory, RunKind::correlators,
                      RunKind::coeff_sweep})
        if (to_string(k) == s)
            return k;
    fail(ErrorKind::ParseError, "field kind: unknown run kind '" + s + "'");
}

void Scenario::validate() const
{
    auto invalid = [](const std::string& what) { fail(ErrorKind::ValidationError, what); };
    if (name.empty())
        invalid("name must not be empty");
    model.validate();
    space.validate();
    kappa.validate();
    if (!(tol.rtol_closed > 0 && tol.atol_closed > 0 && tol.rtol_open > 0 && tol.atol_open > 0 &&
          tol.atol_trajectory > 0 && tol.truncation > 0 && tol.adiabaticity > 0 && tol.rwa > 0))
        invalid("tolerances must be positive");
    if (n_dressed < 0)
        invalid("space.n_dressed must be >= 0");

    if (kind == RunKind::coeff_sweep) {
        if (!(sweep.lambda_min >= 0.0) || !(sweep.lambda_max > sweep.lambda_min))
            invalid("sweep needs 0 <= lambda_min < lambda_max");
        if (sweep.lambda_points < 2)
            invalid("sweep.lambda_points must be >= 2");
        if (sweep.states.empty() || sweep.photons.empty())
            invalid("sweep.states and sweep.photons must be non-empty");
        for (int n : sweep.states)
            if (n < 0)
                invalid("sweep.states must be >= 0");
        for (int m : sweep.photons)
            if (m < 0 || m >= space.n_fock)
                invalid("sweep.photons must lie inside the Fock truncation");
        return;
    }

    target.validate(space.n_fock);
    if (!(pulses.omega1 > 0.0) || !(pulses.ratio > 0.0))
        invalid("pulses.omega1 and pulses.ratio must be positive");
    if (!(pulses.width > 0.0) || !(pulses.period > 0.0))
        invalid("pulses.width and pulses.period must be positive");
    if (pulses.cycles < 1)
        invalid("pulses.cycles must be >= 1");
    if (!(pulses.t1 >= 0.0) || !(pulses.t2 >= 0.0))
        invalid("pulse centres must be >= 0");
    if (grid.points_per_cycle < 2)
        invalid("grid.points_per_cycle must be >= 2");
    if (kind == RunKind::trajectory && run.n_traj < 1)
        invalid("run.n_traj must be >= 1");
    if (kind == RunKind::correlators) {
        if (grid.tau_points < 2)
            invalid("grid.tau_points must be >= 2");
        if (grid.tau_max < 0.0)
            invalid("grid.tau_max must be >= 0");
        if (grid.tau_max == 0.0 && !(kappa.kappa_a > 0.0))
            invalid("grid.tau_max = 0 needs kappa_a > 0");
    }
    if (kind != RunKind::closed && !(kappa.kappa_a > 0.0 || kappa.kappa_ge > 0.0 || kappa.kappa_bg > 0.0))
        invalid("open-system runs need at least one positive kappa");
}

std::vector<std::string> Scenario::warnings() const
{
    std::vector<std::string> out;
    if (kind != RunKind::coeff_sweep && kind != RunKind::closed && kappa.kappa_a * pulses.period < 5.0)
        out.push_back("kappa_a * period < 5: photons may not leave the cavity before the next cycle");
    return out;
}

std::string Scenario::to_text() const
{
    std::string out;
    std::string section = "\x01";
    for (const auto& f : fields()) {
        if (f.section != section) {
            section = f.section;
            if (!section.empty())
                out += "\n[" + section + "]\n";
        }
        out += f.key + " = " + f.get(*this) + "\n";
    }
    return out;
}

nlohmann::json Scenario::to_json() const
{
    nlohmann::json j;
    for (const auto& f : fields()) {
        if (f.section.empty())
            j[f.key] = f.get(*this);
        else
            j[f.section][f.key] = f.get(*this);
    }
    j["overrides"] = overrides;
    return j;
}

std::string Scenario::hash() const
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : to_text()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
    return buf;
}

Scenario parse_scenario(const std::string& text, const std::string& source)
{
    namespace pt = boost::property_tree;
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        fail(ErrorKind::ParseError, source + ":" + std::to_string(e.line()) + ": " + e.message());
    }

    Scenario s;
    for (const auto& [key, node] : tree) {
        if (node.empty()) {
            const Field* f = find_field("", key);
            if (!f)
                fail(ErrorKind::ParseError, source + ": unknown key '" + key + "'");
            f->set(s, strip_comment(node.data()));
            continue;
        }
        for (const auto& [sub, leaf] : node) {
            const Field* f = find_field(key, sub);
            if (!f)
                fail(ErrorKind::ParseError, source + ": unknown key '" + key + "." + sub + "'");
            f->set(s, strip_comment(leaf.data()));
        }
    }
    s.validate();
    return s;
}

Scenario load_scenario(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        fail(ErrorKind::IoError, "cannot open scenario file " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str(), path);
}

void save_scenario(const Scenario& s, const std::string& path)
{
    std::ofstream out(path);
    if (!out)
        fail(ErrorKind::IoError, "cannot write scenario file " + path);
    out << s.to_text();
}

void apply_override(Scenario& s, const std::string& assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        fail(ErrorKind::ParseError, "override '" + assignment + "' is not of the form key=value");
    const std::string path = trim(assignment.substr(0, eq));
    const std::string value = trim(assignment.substr(eq + 1));
    const auto dot = path.find('.');
    const std::string section = dot == std::string::npos ? "" : path.substr(0, dot);
    const std::string key = dot == std::string::npos ? path : path.substr(dot + 1);
    const Field* f = find_field(section, key);
    if (!f)
        fail(ErrorKind::ParseError, "override names unknown key '" + path + "'");
    f->set(s, value);
    s.overrides.push_back(path + "=" + value);
}

} // namespace qrm
