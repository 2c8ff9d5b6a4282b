// Copyright (c) 2026, scriptport developers
// SPDX-License-Identifier: Apache-2.0

#include "scriptport/intent.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <regex>

#include <nlohmann/json.hpp>

#include "json_util.hpp"
#include "scriptport/error.hpp"
#include "scriptport/launch_scan.hpp"

namespace scriptport {

using detail::json;

// ---------------------------------------------------------------------------
// Serialization

json to_json(const PartialJobSpec& p) {
    json out = json::object();
    if (p.cluster) out["cluster"] = *p.cluster;
    if (p.framework) out["framework"] = to_string(*p.framework);
    if (p.strategy) out["strategy"] = to_string(*p.strategy);
    if (p.launcher) out["launcher"] = to_string(*p.launcher);
    if (p.nodes) out["nodes"] = *p.nodes;
    if (p.gpus_per_node) out["gpus_per_node"] = *p.gpus_per_node;
    if (p.total_gpus) out["total_gpus"] = *p.total_gpus;
    if (p.master_port) out["master_port"] = *p.master_port;
    if (p.entry_script) out["entry_script"] = *p.entry_script;
    if (!p.train_args.empty()) out["train_args"] = p.train_args;
    if (p.deepspeed_config) out["deepspeed_config"] = *p.deepspeed_config;
    return out;
}

PartialJobSpec partial_from_json(const json& doc, ErrorCode failure) {
    if (!doc.is_object()) throw Error(failure, "job fields: expected a JSON object");
    auto bad = [&](const std::string& field, const std::string& why) {
        throw Error(failure, "job field \"" + field + "\": " + why);
    };
    auto str = [&](const char* field) -> std::optional<std::string> {
        auto it = doc.find(field);
        if (it == doc.end() || it->is_null()) return std::nullopt;
        if (!it->is_string()) bad(field, "expected string");
        std::string v = detail::trim(it->get<std::string>());
        if (v.empty()) return std::nullopt;
        return v;
    };
    auto count = [&](const char* field, int lo, int hi) -> std::optional<int> {
        auto it = doc.find(field);
        if (it == doc.end() || it->is_null()) return std::nullopt;
        long long v = 0;
        if (it->is_number_integer()) {
            v = it->get<long long>();
        } else if (it->is_string()) {
            auto parsed = parse_count_word(it->get<std::string>());
            if (!parsed) bad(field, "expected integer");
            v = *parsed;
        } else {
            bad(field, "expected integer");
        }
        if (v < lo || v > hi) {
            bad(field, "out of range [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
        }
        return static_cast<int>(v);
    };
    auto enum_field = [&](const char* field, auto parse) {
        auto v = str(field);
        using R = decltype(parse(std::string_view{}));
        if (!v) return R{};
        auto parsed = parse(detail::lowercase(*v));
        if (!parsed) bad(field, "unrecognized value \"" + *v + "\"");
        return parsed;
    };

    PartialJobSpec p;
    if (auto c = str("cluster")) p.cluster = detail::lowercase(*c);
    p.framework = enum_field("framework", parse_framework);
    p.strategy = enum_field("strategy", parse_strategy);
    p.launcher = enum_field("launcher", parse_launcher);
    p.nodes = count("nodes", 1, 1 << 20);
    p.gpus_per_node = count("gpus_per_node", 1, 1 << 20);
    p.total_gpus = count("total_gpus", 1, 1 << 30);
    p.master_port = count("master_port", kMinPort, kMaxPort);
    p.entry_script = str("entry_script");
    p.train_args = str("train_args").value_or("");
    p.deepspeed_config = str("deepspeed_config");
    return p;
}

PartialJobSpec overlay(PartialJobSpec base, const PartialJobSpec& over) {
    if (over.cluster) base.cluster = over.cluster;
    if (over.framework) base.framework = over.framework;
    if (over.strategy) base.strategy = over.strategy;
    if (over.launcher) base.launcher = over.launcher;
    if (over.nodes) base.nodes = over.nodes;
    if (over.gpus_per_node) base.gpus_per_node = over.gpus_per_node;
    if (over.total_gpus) base.total_gpus = over.total_gpus;
    if (over.master_port) base.master_port = over.master_port;
    if (over.entry_script) base.entry_script = over.entry_script;
    if (!over.train_args.empty()) base.train_args = over.train_args;
    if (over.deepspeed_config) base.deepspeed_config = over.deepspeed_config;
    return base;
}

json to_json(const JobSpec& s) {
    json out{
        {"cluster", s.cluster},
        {"framework", to_string(s.framework)},
        {"strategy", to_string(s.strategy)},
        {"launcher", to_string(s.launcher)},
        {"nodes", s.nodes},
        {"gpus_per_node", s.gpus_per_node},
        {"world_size", s.world_size()},
        {"master_port", s.master_port},
        {"master_port_explicit", s.master_port_explicit},
        {"entry_script", s.entry_script},
        {"train_args", s.train_args},
    };
    if (s.deepspeed_config) out["deepspeed_config"] = *s.deepspeed_config;
    return out;
}

std::string spec_digest(const JobSpec& s) {
    const std::string canon = to_json(s).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canon) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = kHex[h & 0xf];
        h >>= 4;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Number words

namespace {

constexpr std::array<std::string_view, 20> kUnits{
    "zero",    "one",     "two",       "three",    "four",     "five",    "six",
    "seven",   "eight",   "nine",      "ten",      "eleven",   "twelve",  "thirteen",
    "fourteen", "fifteen", "sixteen",  "seventeen", "eighteen", "nineteen"};
constexpr std::array<std::string_view, 5> kTens{"twenty", "thirty", "forty", "fifty", "sixty"};
constexpr int kMaxNumberWord = 64;

std::optional<int> unit_value(std::string_view w) {
    for (std::size_t i = 1; i < kUnits.size(); ++i) {
        if (kUnits[i] == w) return static_cast<int>(i);
    }
    return std::nullopt;
}

std::optional<int> tens_value(std::string_view w) {
    for (std::size_t i = 0; i < kTens.size(); ++i) {
        if (kTens[i] == w) return static_cast<int>(20 + 10 * i);
    }
    return std::nullopt;
}

std::optional<int> parse_int(std::string_view s) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

}  // namespace

std::optional<int> parse_count_word(std::string_view word_in) {
    const std::string word = detail::lowercase(detail::trim(word_in));
    if (word.empty()) return std::nullopt;
    if (std::all_of(word.begin(), word.end(), [](unsigned char c) { return std::isdigit(c); })) {
        return parse_int(word);
    }
    if (word == "single" || word == "a single" || word == "a" || word == "an") return 1;
    if (auto u = unit_value(word)) return u;
    if (auto t = tens_value(word)) return t;
    for (char sep : {'-', ' '}) {
        if (auto pos = word.find(sep); pos != std::string::npos) {
            auto t = tens_value(word.substr(0, pos));
            auto u = unit_value(word.substr(pos + 1));
            if (t && u && *u < 10) {
                const int v = *t + *u;
                if (v <= kMaxNumberWord) return v;
            }
        }
    }
    return std::nullopt;
}

namespace {

// Rewrites number words (one..sixty-four) as digits; everything else is
// copied. Input must already be lowercase.
std::string normalize_numbers(const std::string& lc) {
    static const std::regex kCompound(
        R"(\b(twenty|thirty|forty|fifty|sixty)[- ](one|two|three|four|five|six|seven|eight|nine)\b)");
    static const std::regex kSimple(
        R"(\b(one|two|three|four|five|six|seven|eight|nine|ten|eleven|twelve|thirteen|fourteen|fifteen|sixteen|seventeen|eighteen|nineteen|twenty|thirty|forty|fifty|sixty)\b)");
    static const std::regex kSingle(
        R"(\b(an?\s+single|single|an?)([\s-]+)((?:compute\s+|gpu\s+)?(?:node|server|machine|host|gpu)s?)\b)");
    // "4 GPUs a node" is a rate, not a count of nodes.
    static const std::regex kRateBefore(R"((?:gpus?|devices?|accelerators?|cards?)\s+$)");

    auto replace_all = [](const std::string& in, const std::regex& re, auto fn) {
        std::string out;
        auto begin = std::sregex_iterator(in.begin(), in.end(), re);
        std::size_t last = 0;
        for (auto it = begin; it != std::sregex_iterator(); ++it) {
            const auto& m = *it;
            out.append(in, last, static_cast<std::size_t>(m.position()) - last);
            out += fn(m);
            last = static_cast<std::size_t>(m.position() + m.length());
        }
        out.append(in, last, std::string::npos);
        return out;
    };

    std::string s = replace_all(lc, kCompound, [](const std::smatch& m) {
        const int v = *parse_count_word(m[1].str() + "-" + m[2].str());
        return v <= kMaxNumberWord ? std::to_string(v) : m.str();
    });
    s = replace_all(s, kSimple, [](const std::smatch& m) {
        const int v = *parse_count_word(m[1].str());
        return v <= kMaxNumberWord ? std::to_string(v) : m.str();
    });
    s = replace_all(s, kSingle, [](const std::smatch& m) {
        const std::string lead = m[1].str();
        if ((lead == "a" || lead == "an") && std::regex_search(m.prefix().str(), kRateBefore)) return m.str();
        return "1 " + m[3].str();
    });
    return s;
}

struct Found {
    int value;
    std::size_t pos;
};

std::optional<Found> first_int(const std::string& text, const std::regex& re, int group = 1) {
    std::smatch m;
    if (!std::regex_search(text, m, re)) return std::nullopt;
    auto v = parse_int(m[group].str());
    if (!v) return std::nullopt;
    return Found{*v, static_cast<std::size_t>(m.position(group))};
}

std::optional<std::string> first_str(const std::string& text, const std::regex& re, int group = 1) {
    std::smatch m;
    if (!std::regex_search(text, m, re)) return std::nullopt;
    return m[group].str();
}

bool boundary_char(char c) {
    return !(std::isalnum(static_cast<unsigned char>(c)) || c == '_');
}

// Earliest occurrence of `needle` in `hay` delimited by non-word characters.
std::optional<std::size_t> find_word(const std::string& hay, const std::string& needle) {
    for (std::size_t pos = hay.find(needle); pos != std::string::npos;
         pos = hay.find(needle, pos + 1)) {
        const bool left = pos == 0 || boundary_char(hay[pos - 1]);
        const std::size_t end = pos + needle.size();
        const bool right = end >= hay.size() || boundary_char(hay[end]);
        if (left && right) return pos;
    }
    return std::nullopt;
}

std::string strip_quotes(std::string s) {
    s = detail::trim(s);
    if (s.size() >= 2 && (s.front() == '\'' || s.front() == '"') && s.back() == s.front()) {
        s = s.substr(1, s.size() - 2);
    }
    return s;
}

constexpr const char* kGpuNoun = R"((?:gpus?|gpu cards?|graphics cards?|accelerators?|devices?))";
constexpr const char* kNodeNoun = R"((?:compute\s+|gpu\s+|physical\s+|separate\s+)?(?:nodes?|servers?|machines?|hosts?))";

}  // namespace

// ---------------------------------------------------------------------------
// Rule-based extraction

RuleExtractor::RuleExtractor(const ProfileSet& profiles) {
    for (const auto& p : profiles.profiles()) {
        names_.emplace_back(p.id, p.id);
        for (const auto& a : p.aliases) names_.emplace_back(detail::lowercase(a), p.id);
    }
    // Longest names first so "deltaai" wins over "delta".
    std::stable_sort(names_.begin(), names_.end(), [](const auto& a, const auto& b) {
        return a.first.size() > b.first.size();
    });
}

PartialJobSpec RuleExtractor::extract(std::string_view text_in) {
    const std::string text = detail::trim(text_in);
    PartialJobSpec p;
    bool recognized = false;

    // 1. Split off an explicit argument tail ("my training arguments are ...",
    //    "--args '...'").
    std::string main = text;
    {
        static const std::regex kArgsCue(
            R"((?:--args(?:\s+|=)|\b(?:training\s+)?(?:arguments?|args)\s*(?:is|are|:|=)\s*))",
            std::regex::icase);
        std::smatch m;
        if (std::regex_search(text, m, kArgsCue)) {
            p.train_args = strip_quotes(m.suffix().str());
            main = text.substr(0, static_cast<std::size_t>(m.position()));
            recognized = true;
        }
    }

    // 2. Entry script; anything starting with '-' right after it is a tail of
    //    training arguments.
    {
        static const std::regex kEntry(R"((?:^|[\s'"(=:])([A-Za-z0-9_./~+$-]*[A-Za-z0-9_]\.py)\b)");
        std::smatch m;
        if (std::regex_search(main, m, kEntry)) {
            p.entry_script = m[1].str();
            recognized = true;
            const auto after = static_cast<std::size_t>(m.position(1) + m.length(1));
            const std::string rest = main.substr(after);
            const std::string rest_trim = detail::trim(rest);
            if (!rest_trim.empty() && rest_trim[0] == '-' && p.train_args.empty()) {
                p.train_args = rest_trim;
                main = main.substr(0, after);
            }
        }
    }

    // 3. Explicit flags (case-sensitive: -N is nodes).
    auto flag_int = [&](const char* pattern) -> std::optional<int> {
        const std::regex re(std::string(R"((?:^|\s))") + pattern + R"((?:\s+|=)(\d+)\b)");
        if (auto f = first_int(main, re)) return f->value;
        return std::nullopt;
    };
    auto flag_word = [&](const char* pattern) -> std::optional<std::string> {
        const std::regex re(std::string(R"((?:^|\s))") + pattern + R"((?:\s+|=)([A-Za-z0-9_.\-/]+))");
        return first_str(main, re);
    };
    std::optional<int> flag_nodes = flag_int(R"((?:--nodes|--nnodes|--num[-_]nodes|--num_machines|-N))");
    std::optional<int> flag_per =
        flag_int(R"((?:--gpus[-_]per[-_]node|--nproc[-_]per[-_]node|-ppn|--num[-_]gpus))");
    std::optional<int> flag_total =
        flag_int(R"((?:--total[-_]gpus|--world[-_]size|--num_processes|-np))");
    std::optional<int> flag_port =
        flag_int(R"((?:--port|--master[-_]port|--main_process_port))");
    std::optional<std::string> flag_cluster = flag_word(R"((?:--cluster|--machine|--system))");
    std::optional<std::string> flag_framework = flag_word(R"(--framework)");
    std::optional<std::string> flag_strategy = flag_word(R"(--strategy)");
    std::optional<std::string> flag_launcher = flag_word(R"(--launcher)");
    std::optional<std::string> flag_entry = flag_word(R"((?:--entry|--script))");

    const std::string lc = detail::lowercase(main);
    const std::string norm = normalize_numbers(lc);

    // 4. Cluster.
    if (flag_cluster) {
        const std::string key = detail::lowercase(*flag_cluster);
        for (const auto& [name, id] : names_) {
            if (name == key) {
                p.cluster = id;
                break;
            }
        }
    }
    if (!p.cluster) {
        std::optional<std::size_t> best;
        for (const auto& [name, id] : names_) {
            if (auto pos = find_word(lc, name); pos && (!best || *pos < *best)) {
                best = pos;
                p.cluster = id;
            }
        }
    }

    // 5. Launcher, framework and strategy vocabularies.
    if (flag_launcher) p.launcher = parse_launcher(detail::lowercase(*flag_launcher));
    if (!p.launcher) {
        static const std::regex kTorchrun(R"(\btorchrun\b|torch\.distributed\.(?:run|launch)\b)");
        static const std::regex kAccLaunch(R"(\baccelerate\s+launch(?:er)?\b|\baccelerate\s+launcher\b)");
        static const std::regex kDsLaunch(
            R"(\bdeepspeed\s+(?:launcher|launch|runner|cli|command)\b|\b(?:launch|launched|run)\s+(?:it\s+)?(?:with|via|through|using)\s+(?:the\s+)?deepspeed\b)");
        static const std::regex kMpi(R"(\bmpiexec\b|\bmpirun\b)");
        static const std::regex kSrun(R"(\bsrun\b)");
        if (std::regex_search(lc, kTorchrun)) {
            p.launcher = Launcher::torchrun;
        } else if (std::regex_search(lc, kAccLaunch)) {
            p.launcher = Launcher::accelerate;
        } else if (std::regex_search(lc, kDsLaunch)) {
            p.launcher = Launcher::deepspeed;
        } else if (std::regex_search(lc, kMpi)) {
            p.launcher = Launcher::mpiexec;
        } else if (std::regex_search(lc, kSrun)) {
            p.launcher = Launcher::srun;
        }
    }

    if (flag_framework) p.framework = parse_framework(detail::lowercase(*flag_framework));
    if (!p.framework) {
        static const std::regex kDeepspeed(R"(\bdeep[\s-]?speed\b)");
        static const std::regex kAccelerate(R"(\baccelerate\b|\bacc[-_]ddp\b)");
        static const std::regex kPytorch(R"(\bpy[\s-]?torch\b|\btorch\b)");
        if (std::regex_search(lc, kDeepspeed)) {
            p.framework = Framework::deepspeed;
        } else if (std::regex_search(lc, kAccelerate)) {
            p.framework = Framework::accelerate;
        } else if (std::regex_search(lc, kPytorch)) {
            p.framework = Framework::pytorch;
        }
    }

    if (flag_strategy) {
        const std::string s = detail::lowercase(*flag_strategy);
        if (s == "acc-ddp" || s == "acc_ddp") {
            p.strategy = Strategy::ddp;
            p.framework = Framework::accelerate;
        } else if (s == "zero-3" || s == "zero_3") {
            p.strategy = Strategy::zero3;
        } else {
            p.strategy = parse_strategy(s);
        }
    }
    if (!p.strategy) {
        static const std::regex kFsdp(R"(\bfsdp\b|\bfully[\s-]+sharded\b)");
        static const std::regex kZero3(
            R"(\bzero[\s_-]?(?:stage[\s_-]?)?3\b|\bzero[\s_-]?(?:stage|level)[\s_-]+3\b|\bstage[\s_-]?3\b)");
        static const std::regex kDdp(
            R"(\bddp\b|\bdata[\s-]+parallel(?:ism)?\b|\bdistributed\s*data\s*parallel\b|\bdistributeddataparallel\b|\bacc[-_]ddp\b)");
        if (std::regex_search(norm, kFsdp)) {
            p.strategy = Strategy::fsdp;
        } else if (std::regex_search(norm, kZero3)) {
            p.strategy = Strategy::zero3;
        } else if (std::regex_search(norm, kDdp)) {
            p.strategy = Strategy::ddp;
        }
    }

    // 6. Topology.
    if (flag_nodes) p.nodes = flag_nodes;
    if (flag_per) p.gpus_per_node = flag_per;
    if (flag_total) p.total_gpus = flag_total;

    if (!p.gpus_per_node) {
        const std::string per_marker =
            std::string(R"(\s*(?:per|/|on each|on every|for each|in each|each|a|on the)\s*)") + kNodeNoun;
        const std::regex kPerA(std::string(R"((\d+)\s*(?:x\s*)?)") + kGpuNoun + per_marker + R"(\b)");
        const std::regex kPerB(std::string(R"((\d+)\s*)") + kGpuNoun + R"(\s+(?:each|apiece)\b)");
        const std::regex kPerC(
            std::string(R"(\b(?:each|every|per)\s+)") + kNodeNoun +
            R"(\s*(?:has|have|with|uses|using|having|gets|runs|of|:|should use|will use|needs)?\s*(\d+)\s*)" +
            kGpuNoun + R"(\b)");
        const std::regex kPerD(
            std::string(R"(\b(?:gpus?|gpu count)\s+per\s+node\s*(?:is|=|:|of)?\s*(\d+)\b)"));
        if (auto f = first_int(norm, kPerA)) {
            p.gpus_per_node = f->value;
        } else if (auto f2 = first_int(norm, kPerB)) {
            p.gpus_per_node = f2->value;
        } else if (auto f3 = first_int(norm, kPerC)) {
            p.gpus_per_node = f3->value;
        } else if (auto f4 = first_int(norm, kPerD)) {
            p.gpus_per_node = f4->value;
        }
    }

    if (!p.nodes) {
        const std::regex kNodesA(std::string(R"((?:^|[^\w.\-/])(\d+)\s*(?:x\s+)?)") + kNodeNoun + R"(\b)");
        const std::regex kNodesB(
            R"(\b(?:number of (?:compute )?nodes|node count|nodes|num[ _]nodes|number of servers|number of machines)\s*(?:is|=|:|of|should be|will be)\s*(\d+)\b)");
        const std::regex kNodesC(R"(\bnode count\s*(\d+)\b)");
        if (auto f = first_int(norm, kNodesA)) {
            p.nodes = f->value;
        } else if (auto f2 = first_int(norm, kNodesB)) {
            p.nodes = f2->value;
        } else if (auto f3 = first_int(norm, kNodesC)) {
            p.nodes = f3->value;
        }
    }

    if (!p.total_gpus) {
        const std::regex kTotalA(std::string(R"(\b(?:a total of|total of|in total|totaling|totalling|overall)\s*(\d+)\s*)") + kGpuNoun);
        const std::regex kTotalB(std::string(R"((\d+)\s*)") + kGpuNoun +
                                 R"(\s*(?:in total|total|altogether|overall|combined|in all)\b)");
        const std::regex kTotalC(R"(\b(?:world[\s_-]?size|total gpus?|total gpu count|gpu count|number of gpus)\s*(?:is|=|:|of|should be)?\s*(\d+)\b)");
        if (auto f = first_int(norm, kTotalA)) {
            p.total_gpus = f->value;
        } else if (auto f2 = first_int(norm, kTotalB)) {
            p.total_gpus = f2->value;
        } else if (auto f3 = first_int(norm, kTotalC)) {
            p.total_gpus = f3->value;
        } else {
            // A bare "<n> GPUs" that is not the per-node count is the total.
            const std::regex kBare(std::string(R"((?:^|[^\w.\-/])(\d+)\s*(?:x\s*)?)") + kGpuNoun + R"(\b)");
            for (auto it = std::sregex_iterator(norm.begin(), norm.end(), kBare);
                 it != std::sregex_iterator(); ++it) {
                const int v = *parse_int((*it)[1].str());
                if (p.gpus_per_node && v == *p.gpus_per_node) continue;
                p.total_gpus = v;
                break;
            }
        }
    }
    if (p.total_gpus && !p.nodes && !p.gpus_per_node) p.nodes = 1;

    if (flag_port) {
        p.master_port = flag_port;
    } else {
        static const std::regex kPort(
            R"(\b(?:master[\s_-]?port|main[\s_-]process[\s_-]port|rendezvous port|rdzv port|port(?:\s+number)?)\s*(?:is|=|:|of|to)?\s*(\d{2,5})\b)");
        if (auto f = first_int(norm, kPort)) p.master_port = f->value;
    }
    if (p.master_port && (*p.master_port < kMinPort || *p.master_port > kMaxPort)) {
        p.master_port.reset();
    }

    if (flag_entry && !p.entry_script) p.entry_script = flag_entry;

    recognized = recognized || p.cluster || p.framework || p.strategy || p.launcher || p.nodes ||
                 p.gpus_per_node || p.total_gpus || p.master_port || p.entry_script;
    if (!recognized) p.train_args = text;
    return p;
}

// ---------------------------------------------------------------------------
// Completion and validation

PartialJobSpec apply_implications(PartialJobSpec p) {
    if (!p.framework && p.launcher) {
        switch (*p.launcher) {
            case Launcher::torchrun:
            case Launcher::mpiexec:
            case Launcher::srun: p.framework = Framework::pytorch; break;
            case Launcher::deepspeed: p.framework = Framework::deepspeed; break;
            case Launcher::accelerate: p.framework = Framework::accelerate; break;
        }
    }
    if (!p.framework && p.strategy == Strategy::zero3) p.framework = Framework::deepspeed;
    if (p.framework && !p.strategy) p.strategy = Strategy::ddp;
    return p;
}

std::vector<std::string> missing_fields(const PartialJobSpec& in) {
    const PartialJobSpec p = apply_implications(in);
    std::vector<std::string> out;
    if (!p.cluster) out.emplace_back("cluster");
    if (!p.framework) out.emplace_back("framework");
    if (!p.strategy) out.emplace_back("strategy");
    if (!p.nodes && !(p.total_gpus && p.gpus_per_node)) out.emplace_back("nodes");
    if (!p.gpus_per_node && !(p.total_gpus && p.nodes)) out.emplace_back("gpus_per_node");
    if (!p.entry_script) out.emplace_back("entry_script");
    return out;
}

std::vector<Topology> suggest_topologies(int world, int capacity) {
    std::vector<Topology> out;
    for (int per = std::min(capacity, world); per >= 1; --per) {
        if (world % per == 0) out.push_back({world / per, per});
    }
    return out;
}

JobSpec finalize(const PartialJobSpec& in, const ClusterProfile& profile) {
    const PartialJobSpec p = apply_implications(in);
    if (auto missing = missing_fields(p); !missing.empty()) {
        std::string list;
        for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
        throw Error(ErrorCode::incomplete_spec, "missing required fields: " + list);
    }
    const bool matches = *p.cluster == profile.id ||
                         std::any_of(profile.aliases.begin(), profile.aliases.end(),
                                     [&](const std::string& a) {
                                         return detail::lowercase(a) == detail::lowercase(*p.cluster);
                                     });
    if (!matches) {
        throw Error(ErrorCode::usage,
                    "job targets \"" + *p.cluster + "\" but was finalized against \"" + profile.id + "\"");
    }

    auto inconsistent = [](const std::string& why) {
        throw Error(ErrorCode::inconsistent_topology, why);
    };
    int nodes = 0;
    int per = 0;
    if (p.nodes && p.gpus_per_node) {
        nodes = *p.nodes;
        per = *p.gpus_per_node;
        if (p.total_gpus && *p.total_gpus != nodes * per) {
            inconsistent("total_gpus " + std::to_string(*p.total_gpus) + " != nodes " +
                         std::to_string(nodes) + " x gpus_per_node " + std::to_string(per));
        }
    } else if (p.nodes) {
        nodes = *p.nodes;
        if (nodes < 1 || *p.total_gpus % nodes != 0) {
            inconsistent("total_gpus " + std::to_string(*p.total_gpus) +
                         " is not divisible by nodes " + std::to_string(nodes));
        }
        per = *p.total_gpus / nodes;
    } else {
        per = *p.gpus_per_node;
        if (per < 1 || *p.total_gpus % per != 0) {
            inconsistent("total_gpus " + std::to_string(*p.total_gpus) +
                         " is not divisible by gpus_per_node " + std::to_string(per));
        }
        nodes = *p.total_gpus / per;
    }
    if (nodes < 1 || per < 1) inconsistent("node and GPU counts must be >= 1");
    if (per > profile.gpus_per_node) {
        throw Error(ErrorCode::capacity,
                    "gpus_per_node " + std::to_string(per) + " exceeds the " + profile.id +
                        " limit of " + std::to_string(profile.gpus_per_node) + " GPUs per node");
    }

    JobSpec s;
    s.cluster = profile.id;
    s.framework = *p.framework;
    s.strategy = *p.strategy;
    if (p.launcher) {
        s.launcher = *p.launcher;
    } else if (s.framework == Framework::deepspeed) {
        s.launcher = Launcher::deepspeed;
    } else if (s.framework == Framework::accelerate) {
        s.launcher = Launcher::accelerate;
    } else {
        s.launcher = profile.default_launcher;
    }
    s.nodes = nodes;
    s.gpus_per_node = per;
    if (p.master_port) {
        if (*p.master_port < kMinPort || *p.master_port > kMaxPort) {
            throw Error(ErrorCode::usage, "master_port " + std::to_string(*p.master_port) +
                                              " outside [1024, 65535]");
        }
        s.master_port = *p.master_port;
        s.master_port_explicit = true;
    }
    s.entry_script = *p.entry_script;
    s.train_args = p.train_args;
    s.deepspeed_config = p.deepspeed_config;
    return s;
}

PartialJobSpec parse_script(std::string_view script) {
    const LaunchScan scan = scan_launch(script);
    PartialJobSpec p;
    p.launcher = scan.launcher;
    p.nodes = scan.nodes ? scan.nodes : scan.alloc_nodes;
    p.gpus_per_node = scan.per_node;
    p.total_gpus = scan.world;
    if (scan.port && *scan.port >= kMinPort && *scan.port <= kMaxPort) p.master_port = scan.port;
    p.entry_script = scan.entry_script;
    p.train_args = scan.train_args;
    p.deepspeed_config = scan.deepspeed_config;
    if (scan.fsdp_flag) p.strategy = Strategy::fsdp;
    if (!scan.launcher) {
        // Without a launcher nothing else in the script is trusted.
        return PartialJobSpec{};
    }
    return p;
}

void set_field(PartialJobSpec& p, std::string_view field_in, std::string_view value_in,
               const ProfileSet& profiles) {
    const std::string field = detail::lowercase(detail::trim(field_in));
    const std::string value = detail::trim(value_in);
    auto bad = [&]() {
        throw Error(ErrorCode::usage, "invalid value \"" + value + "\" for " + field);
    };
    auto count = [&](int lo, int hi) {
        auto v = parse_count_word(value);
        if (!v || *v < lo || *v > hi) bad();
        return *v;
    };
    const std::string lv = detail::lowercase(value);
    if (field == "cluster") {
        p.cluster = profiles.resolve(value).id;
    } else if (field == "framework") {
        p.framework = parse_framework(lv);
        if (!p.framework) bad();
    } else if (field == "strategy") {
        if (lv == "acc-ddp" || lv == "acc_ddp") {
            p.strategy = Strategy::ddp;
            p.framework = Framework::accelerate;
            p.launcher = Launcher::accelerate;
        } else if (lv == "zero-3" || lv == "zero_3") {
            p.strategy = Strategy::zero3;
        } else {
            p.strategy = parse_strategy(lv);
            if (!p.strategy) bad();
        }
    } else if (field == "launcher") {
        p.launcher = parse_launcher(lv);
        if (!p.launcher) bad();
    } else if (field == "nodes") {
        p.nodes = count(1, 1 << 20);
    } else if (field == "gpus_per_node" || field == "gpus-per-node") {
        p.gpus_per_node = count(1, 1 << 20);
    } else if (field == "total_gpus" || field == "total-gpus") {
        p.total_gpus = count(1, 1 << 30);
    } else if (field == "master_port" || field == "port") {
        p.master_port = count(kMinPort, kMaxPort);
    } else if (field == "entry_script" || field == "entry") {
        if (value.empty()) bad();
        p.entry_script = value;
    } else if (field == "train_args" || field == "args") {
        p.train_args = value;
    } else if (field == "deepspeed_config") {
        if (value.empty()) bad();
        p.deepspeed_config = value;
    } else {
        throw Error(ErrorCode::usage, "unknown job field \"" + field + "\"");
    }
}

}  // namespace scriptport
