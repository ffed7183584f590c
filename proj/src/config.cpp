#include "xlra/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include "xlra/error.hpp"

namespace xlra {

void
KeyValues::set(const std::string& key, const std::string& value)
{
    for (auto& [k, v] : items_)
    {
        if (k == key)
        {
            v = value;
            return;
        }
    }
    items_.emplace_back(key, value);
}

const std::string*
KeyValues::find(const std::string& key) const
{
    for (const auto& [k, v] : items_)
    {
        if (k == key)
        {
            return &v;
        }
    }
    return nullptr;
}

bool
KeyValues::erase(const std::string& key)
{
    const auto it = std::find_if(items_.begin(), items_.end(), [&](const auto& kv) { return kv.first == key; });
    if (it == items_.end())
    {
        return false;
    }
    items_.erase(it);
    return true;
}

namespace {

std::string
trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos)
    {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

void
parse_line(KeyValues& kv, const std::string& raw, int lineno)
{
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';')
    {
        return;
    }
    if (line.front() == '[' && line.back() == ']')
    {
        return;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
    {
        throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(std::string_view(line).substr(0, eq));
    if (key.empty())
    {
        throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    }
    kv.set(key, trim(std::string_view(line).substr(eq + 1)));
}

double
to_double(const std::string& key, const std::string& text)
{
    const std::string t = trim(text);
    double v = 0.0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size() || t.empty())
    {
        throw ConfigError("'" + key + "': not a number: '" + text + "'");
    }
    return v;
}

long long
to_integer(const std::string& key, const std::string& text)
{
    const std::string t = trim(text);
    long long v = 0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size() || t.empty())
    {
        throw ConfigError("'" + key + "': not an integer: '" + text + "'");
    }
    return v;
}

int
to_int(const std::string& key, const std::string& text)
{
    const long long v = to_integer(key, text);
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
    {
        throw ConfigError("'" + key + "': out of range");
    }
    return static_cast<int>(v);
}

bool
to_bool(const std::string& key, const std::string& text)
{
    const std::string t = trim(text);
    if (t == "true" || t == "1" || t == "yes" || t == "on")
    {
        return true;
    }
    if (t == "false" || t == "0" || t == "no" || t == "off")
    {
        return false;
    }
    throw ConfigError("'" + key + "': not a boolean: '" + text + "'");
}

std::vector<std::string>
split_list(const std::string& text)
{
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
    {
        item = trim(item);
        if (!item.empty())
        {
            out.push_back(item);
        }
    }
    return out;
}

struct Field
{
    const char* key;
    std::function<void(TrialConfig&, const std::string&)> set;
    std::function<std::string(const TrialConfig&)> get;
};

std::string
num(double v)
{
    return format_number(v);
}

template <typename T>
std::string
integer(T v)
{
    return std::to_string(v);
}

const std::vector<Field>&
fields()
{
    static const std::vector<Field> table = {
        {"protocol",
         [](TrialConfig& c, const std::string& v) { c.protocol = parse_protocol(trim(v)); },
         [](const TrialConfig& c) { return std::string(to_string(c.protocol)); }},
        {"K",
         [](TrialConfig& c, const std::string& v) { c.scenario.users = to_int("K", v); },
         [](const TrialConfig& c) { return integer(c.scenario.users); }},
        {"B",
         [](TrialConfig& c, const std::string& v) { c.scenario.subarrays = to_int("B", v); },
         [](const TrialConfig& c) { return integer(c.scenario.subarrays); }},
        {"delta",
         [](TrialConfig& c, const std::string& v) { c.decision.delta = to_double("delta", v); },
         [](const TrialConfig& c) { return num(c.decision.delta); }},
        {"pa",
         [](TrialConfig& c, const std::string& v) { c.access.first_attempt_prob = to_double("pa", v); },
         [](const TrialConfig& c) { return num(c.access.first_attempt_prob); }},
        {"pna",
         [](TrialConfig& c, const std::string& v) { c.access.retry_prob = to_double("pna", v); },
         [](const TrialConfig& c) { return num(c.access.retry_prob); }},
        {"pb",
         [](TrialConfig& c, const std::string& v) { c.scenario.visibility_probability = to_double("pb", v); },
         [](const TrialConfig& c) { return num(c.scenario.visibility_probability); }},
        {"tau",
         [](TrialConfig& c, const std::string& v) { c.pilots.size = to_int("tau", v); },
         [](const TrialConfig& c) { return integer(c.pilots.size); }},
        {"varpi",
         [](TrialConfig& c, const std::string& v) { c.resolution.varpi = to_double("varpi", v); },
         [](const TrialConfig& c) { return num(c.resolution.varpi); }},
        {"sigma2",
         [](TrialConfig& c, const std::string& v) { c.resolution.noise_power = to_double("sigma2", v); },
         [](const TrialConfig& c) { return num(c.resolution.noise_power); }},
        {"trials",
         [](TrialConfig& c, const std::string& v) { c.n_trials = to_int("trials", v); },
         [](const TrialConfig& c) { return integer(c.n_trials); }},
        {"blocks",
         [](TrialConfig& c, const std::string& v) { c.n_blocks = to_int("blocks", v); },
         [](const TrialConfig& c) { return integer(c.n_blocks); }},
        {"warmup",
         [](TrialConfig& c, const std::string& v) { c.warmup_blocks = to_int("warmup", v); },
         [](const TrialConfig& c) { return integer(c.warmup_blocks); }},
        {"seed",
         [](TrialConfig& c, const std::string& v) {
             const std::string t = trim(v);
             std::uint64_t s = 0;
             const auto res = std::from_chars(t.data(), t.data() + t.size(), s);
             if (res.ec != std::errc() || res.ptr != t.data() + t.size() || t.empty())
             {
                 throw ConfigError("'seed': not an unsigned integer: '" + v + "'");
             }
             c.seed = s;
         },
         [](const TrialConfig& c) { return integer(c.seed); }},
        {"estimator",
         [](TrialConfig& c, const std::string& v) {
             const std::string t = trim(v);
             if (t == "genie")
             {
                 c.decision.estimator = EstimatorMode::Genie;
             }
             else if (t == "noisy")
             {
                 c.decision.estimator = EstimatorMode::Noisy;
             }
             else
             {
                 throw ConfigError("'estimator': expected genie or noisy");
             }
         },
         [](const TrialConfig& c) {
             return std::string(c.decision.estimator == EstimatorMode::Genie ? "genie" : "noisy");
         }},
        {"noise_scale",
         [](TrialConfig& c, const std::string& v) { c.decision.noise_scale = to_double("noise_scale", v); },
         [](const TrialConfig& c) { return num(c.decision.noise_scale); }},
        {"literal_eq3",
         [](TrialConfig& c, const std::string& v) { c.resolution.literal_eq3 = to_bool("literal_eq3", v); },
         [](const TrialConfig& c) { return std::string(c.resolution.literal_eq3 ? "true" : "false"); }},
        {"decode_threshold",
         [](TrialConfig& c, const std::string& v) {
             const std::string t = trim(v);
             if (t == "none" || t.empty())
             {
                 c.resolution.decode_threshold.reset();
             }
             else
             {
                 c.resolution.decode_threshold = to_double("decode_threshold", t);
             }
         },
         [](const TrialConfig& c) {
             return c.resolution.decode_threshold ? num(*c.resolution.decode_threshold) : std::string("none");
         }},
        {"max_attempts",
         [](TrialConfig& c, const std::string& v) { c.access.max_attempts = to_int("max_attempts", v); },
         [](const TrialConfig& c) { return integer(c.access.max_attempts); }},
        {"averaging",
         [](TrialConfig& c, const std::string& v) {
             const std::string t = trim(v);
             if (t == "per_block")
             {
                 c.averaging = SumRateAveraging::PerBlock;
             }
             else if (t == "admission_blocks")
             {
                 c.averaging = SumRateAveraging::AdmissionBlocks;
             }
             else
             {
                 throw ConfigError("'averaging': expected per_block or admission_blocks");
             }
         },
         [](const TrialConfig& c) {
             return std::string(c.averaging == SumRateAveraging::PerBlock ? "per_block" : "admission_blocks");
         }},
        {"rho",
         [](TrialConfig& c, const std::string& v) { c.scenario.channel.tx_power = to_double("rho", v); },
         [](const TrialConfig& c) { return num(c.scenario.channel.tx_power); }},
        {"kappa",
         [](TrialConfig& c, const std::string& v) { c.scenario.channel.path_loss_exponent = to_double("kappa", v); },
         [](const TrialConfig& c) { return num(c.scenario.channel.path_loss_exponent); }},
        {"g_db",
         [](TrialConfig& c, const std::string& v) { c.scenario.channel.reference_gain_db = to_double("g_db", v); },
         [](const TrialConfig& c) { return num(c.scenario.channel.reference_gain_db); }},
        {"shadow_std_db",
         [](TrialConfig& c, const std::string& v) { c.scenario.channel.shadow_std_db = to_double("shadow_std_db", v); },
         [](const TrialConfig& c) { return num(c.scenario.channel.shadow_std_db); }},
        {"shadowing",
         [](TrialConfig& c, const std::string& v) {
             const std::string t = trim(v);
             if (t == "antenna")
             {
                 c.scenario.channel.shadowing = ShadowingMode::PerAntenna;
             }
             else if (t == "subarray")
             {
                 c.scenario.channel.shadowing = ShadowingMode::PerSubarray;
             }
             else
             {
                 throw ConfigError("'shadowing': expected antenna or subarray");
             }
         },
         [](const TrialConfig& c) {
             return std::string(c.scenario.channel.shadowing == ShadowingMode::PerAntenna ? "antenna" : "subarray");
         }},
        {"My",
         [](TrialConfig& c, const std::string& v) { c.scenario.geometry.elements_y = to_int("My", v); },
         [](const TrialConfig& c) { return integer(c.scenario.geometry.elements_y); }},
        {"Mz",
         [](TrialConfig& c, const std::string& v) { c.scenario.geometry.elements_z = to_int("Mz", v); },
         [](const TrialConfig& c) { return integer(c.scenario.geometry.elements_z); }},
        {"dm",
         [](TrialConfig& c, const std::string& v) { c.scenario.geometry.spacing = to_double("dm", v); },
         [](const TrialConfig& c) { return num(c.scenario.geometry.spacing); }},
        {"h_array",
         [](TrialConfig& c, const std::string& v) { c.scenario.geometry.mount_height = to_double("h_array", v); },
         [](const TrialConfig& c) { return num(c.scenario.geometry.mount_height); }},
        {"cell_width",
         [](TrialConfig& c, const std::string& v) { c.scenario.cell.width = to_double("cell_width", v); },
         [](const TrialConfig& c) { return num(c.scenario.cell.width); }},
        {"cell_depth",
         [](TrialConfig& c, const std::string& v) { c.scenario.cell.depth = to_double("cell_depth", v); },
         [](const TrialConfig& c) { return num(c.scenario.cell.depth); }},
        {"d_min",
         [](TrialConfig& c, const std::string& v) { c.scenario.cell.d_min = to_double("d_min", v); },
         [](const TrialConfig& c) { return num(c.scenario.cell.d_min); }},
        {"d_max",
         [](TrialConfig& c, const std::string& v) { c.scenario.cell.d_max = to_double("d_max", v); },
         [](const TrialConfig& c) { return num(c.scenario.cell.d_max); }},
        {"h_user_min",
         [](TrialConfig& c, const std::string& v) { c.scenario.cell.height_min = to_double("h_user_min", v); },
         [](const TrialConfig& c) { return num(c.scenario.cell.height_min); }},
        {"h_user_max",
         [](TrialConfig& c, const std::string& v) { c.scenario.cell.height_max = to_double("h_user_max", v); },
         [](const TrialConfig& c) { return num(c.scenario.cell.height_max); }},
        {"allow_small_subarrays",
         [](TrialConfig& c, const std::string& v) {
             c.scenario.allow_small_subarrays = to_bool("allow_small_subarrays", v);
         },
         [](const TrialConfig& c) { return std::string(c.scenario.allow_small_subarrays ? "true" : "false"); }},
    };
    return table;
}

const Field*
find_field(const std::string& key)
{
    for (const Field& f : fields())
    {
        if (key == f.key)
        {
            return &f;
        }
    }
    return nullptr;
}

} // namespace

KeyValues
parse_config_text(const std::string& text)
{
    KeyValues kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line))
    {
        parse_line(kv, line, ++lineno);
    }
    return kv;
}

KeyValues
parse_embedded_config(const std::string& csv_text)
{
    KeyValues kv;
    std::istringstream in(csv_text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line))
    {
        ++lineno;
        if (line.rfind("# ", 0) != 0)
        {
            if (line.empty() || line[0] == '#')
            {
                continue;
            }
            break; // header row: the embedded block is over
        }
        const std::string body = line.substr(2);
        if (body.rfind("xlra ", 0) != 0 && body.find('=') != std::string::npos)
        {
            parse_line(kv, body, lineno);
        }
    }
    return kv;
}

KeyValues
load_config_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw ConfigError("cannot read config file '" + path + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    if (text.rfind("# ", 0) == 0)
    {
        return parse_embedded_config(text);
    }
    return parse_config_text(text);
}

bool
is_grid_key(const std::string& key)
{
    return key == "protocol" || key == "K" || key == "B" || key == "delta";
}

std::vector<double>
parse_number_list(const std::string& text)
{
    const std::string t = trim(text);
    if (t.find(':') != std::string::npos && t.find(',') == std::string::npos)
    {
        std::vector<std::string> parts;
        std::stringstream ss(t);
        std::string p;
        while (std::getline(ss, p, ':'))
        {
            parts.push_back(p);
        }
        if (parts.size() != 3)
        {
            throw ConfigError("range must be start:stop:step, got '" + text + "'");
        }
        const double start = to_double("range", parts[0]);
        const double stop = to_double("range", parts[1]);
        const double step = to_double("range", parts[2]);
        if (step == 0.0 || (stop - start) / step < 0.0)
        {
            throw ConfigError("range '" + text + "' has no elements");
        }
        const auto n = static_cast<long long>(std::floor((stop - start) / step + 1e-9)) + 1;
        std::vector<double> out;
        out.reserve(static_cast<std::size_t>(n));
        for (long long i = 0; i < n; ++i)
        {
            out.push_back(start + static_cast<double>(i) * step);
        }
        return out;
    }
    std::vector<double> out;
    for (const auto& item : split_list(t))
    {
        out.push_back(to_double("list", item));
    }
    return out;
}

std::vector<int>
parse_int_list(const std::string& text)
{
    std::vector<int> out;
    for (double v : parse_number_list(text))
    {
        if (v != std::floor(v) || std::abs(v) > std::numeric_limits<int>::max())
        {
            throw ConfigError("expected integers, got '" + text + "'");
        }
        out.push_back(static_cast<int>(v));
    }
    return out;
}

std::vector<Protocol>
parse_protocol_list(const std::string& text)
{
    std::vector<Protocol> out;
    for (const auto& item : split_list(text))
    {
        out.push_back(parse_protocol(item));
    }
    return out;
}

void
apply_config(TrialConfig& cfg, const KeyValues& kv)
{
    for (const auto& [key, value] : kv.items())
    {
        const Field* f = find_field(key);
        if (!f)
        {
            throw ConfigError("unknown config key '" + key + "'");
        }
        if (is_grid_key(key) && split_list(value).size() > 1)
        {
            throw ConfigError("'" + key + "' must be a single value here");
        }
        f->set(cfg, value);
    }
}

SweepSpec
make_sweep_spec(const KeyValues& kv)
{
    KeyValues scalars = kv;
    KeyValues grids;
    for (const auto& [key, value] : kv.items())
    {
        if (is_grid_key(key))
        {
            grids.set(key, value);
            scalars.erase(key);
        }
    }
    SweepSpec spec;
    apply_config(spec.base, scalars);

    const std::string* p = grids.find("protocol");
    spec.protocols = p ? parse_protocol_list(*p) : std::vector<Protocol>{spec.base.protocol};
    const std::string* k = grids.find("K");
    spec.users = k ? parse_int_list(*k) : std::vector<int>{spec.base.scenario.users};
    const std::string* b = grids.find("B");
    spec.subarrays = b ? parse_int_list(*b) : std::vector<int>{spec.base.scenario.subarrays};
    const std::string* d = grids.find("delta");
    spec.deltas = d ? parse_number_list(*d) : std::vector<double>{spec.base.decision.delta};

    if (!spec.protocols.empty())
    {
        spec.base.protocol = spec.protocols.front();
    }
    if (!spec.users.empty())
    {
        spec.base.scenario.users = spec.users.front();
    }
    if (!spec.subarrays.empty())
    {
        spec.base.scenario.subarrays = spec.subarrays.front();
    }
    if (!spec.deltas.empty())
    {
        spec.base.decision.delta = spec.deltas.front();
    }
    return spec;
}

std::vector<std::pair<std::string, std::string>>
config_entries(const TrialConfig& cfg)
{
    std::vector<std::pair<std::string, std::string>> out;
    for (const Field& f : fields())
    {
        out.emplace_back(f.key, f.get(cfg));
    }
    return out;
}

std::vector<std::string>
config_lines(const std::vector<std::pair<std::string, std::string>>& entries)
{
    std::vector<std::string> out;
    out.reserve(entries.size());
    for (const auto& [k, v] : entries)
    {
        out.push_back(k + " = " + v);
    }
    return out;
}

} // namespace xlra
