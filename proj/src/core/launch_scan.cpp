// Copyright (c) 2026, scriptport developers
// SPDX-License-Identifier: Apache-2.0

#include "scriptport/launch_scan.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>

namespace scriptport {

namespace {

// Copies a balanced `$(...)` (starting at the '$') verbatim into out; returns
// the index just past the closing paren.
std::size_t copy_subst(std::string_view s, std::size_t i, std::string& out) {
    int depth = 0;
    char quote = 0;
    for (; i < s.size(); ++i) {
        const char c = s[i];
        out.push_back(c);
        if (quote != 0) {
            if (c == quote) quote = 0;
            continue;
        }
        if (c == '\'' || c == '"') {
            quote = c;
        } else if (c == '(') {
            ++depth;
        } else if (c == ')') {
            if (--depth == 0) return i + 1;
        }
    }
    return i;
}

}  // namespace

std::vector<std::vector<std::string>> split_commands(std::string_view s) {
    std::vector<std::vector<std::string>> commands;
    std::vector<std::string> current;
    std::string word;
    bool in_word = false;
    bool skip_next_word = false;  // target of a redirection

    auto end_word = [&] {
        if (!in_word) return;
        if (skip_next_word) {
            skip_next_word = false;
        } else {
            current.push_back(word);
        }
        word.clear();
        in_word = false;
    };
    auto end_command = [&] {
        end_word();
        if (!current.empty()) commands.push_back(std::move(current));
        current.clear();
    };

    for (std::size_t i = 0; i < s.size(); ++i) {
        const char c = s[i];
        if (c == ' ' || c == '\t' || c == '\r') {
            end_word();
        } else if (c == '\n' || c == ';') {
            end_command();
        } else if (c == '&' || c == '|') {
            end_command();
            if (i + 1 < s.size() && s[i + 1] == c) ++i;
        } else if (c == '>' || c == '<') {
            if (in_word && std::all_of(word.begin(), word.end(),
                                       [](unsigned char d) { return std::isdigit(d) != 0; })) {
                word.clear();
                in_word = false;
            }
            end_word();
            if (i + 1 < s.size() && (s[i + 1] == '>' || s[i + 1] == '&')) ++i;
            skip_next_word = true;
        } else if (c == '#' && !in_word) {
            while (i + 1 < s.size() && s[i + 1] != '\n') ++i;
        } else if (c == '\'') {
            in_word = true;
            for (++i; i < s.size() && s[i] != '\''; ++i) word.push_back(s[i]);
        } else if (c == '"') {
            in_word = true;
            for (++i; i < s.size() && s[i] != '"'; ++i) {
                if (s[i] == '\\' && i + 1 < s.size() &&
                    (s[i + 1] == '"' || s[i + 1] == '\\' || s[i + 1] == '$')) {
                    word.push_back(s[++i]);
                } else if (s[i] == '$' && i + 1 < s.size() && s[i + 1] == '(') {
                    i = copy_subst(s, i, word) - 1;
                } else {
                    word.push_back(s[i]);
                }
            }
        } else if (c == '$' && i + 1 < s.size() && s[i + 1] == '(') {
            in_word = true;
            i = copy_subst(s, i, word) - 1;
        } else if (c == '`') {
            in_word = true;
            word.push_back(c);
            for (++i; i < s.size() && s[i] != '`'; ++i) word.push_back(s[i]);
            if (i < s.size()) word.push_back('`');
        } else if (c == '\\') {
            if (i + 1 < s.size()) {
                if (s[i + 1] != '\n') {
                    in_word = true;
                    word.push_back(s[i + 1]);
                }
                ++i;
            }
        } else {
            in_word = true;
            word.push_back(c);
        }
    }
    end_command();
    return commands;
}

namespace {

using Words = std::vector<std::string>;

std::optional<int> parse_count(std::string_view v) {
    // Elastic ranges such as "1:4" resolve to their upper bound.
    if (auto colon = v.rfind(':'); colon != std::string_view::npos) v = v.substr(colon + 1);
    int out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) return std::nullopt;
    return out;
}

std::string basename(std::string_view w) {
    auto slash = w.rfind('/');
    return std::string(slash == std::string_view::npos ? w : w.substr(slash + 1));
}

bool is_assignment(std::string_view w) {
    if (w.empty() || !(std::isalpha(static_cast<unsigned char>(w[0])) || w[0] == '_')) {
        return false;
    }
    for (std::size_t i = 1; i < w.size(); ++i) {
        if (w[i] == '=') return true;
        if (!(std::isalnum(static_cast<unsigned char>(w[i])) || w[i] == '_')) return false;
    }
    return false;
}

bool is_python(std::string_view w) {
    const std::string b = basename(w);
    return b == "python" || b == "python3" || (b.rfind("python3.", 0) == 0);
}

// An option cursor over a word list: splits "--opt=value" and knows which
// options consume the following word.
struct Options {
    const Words& w;
    std::size_t i;
    const std::set<std::string>& valued;

    bool at_option() const { return i < w.size() && w[i].size() > 1 && w[i][0] == '-'; }

    // Returns (name, value); value empty for flags.
    std::pair<std::string, std::string> next() {
        const std::string& cur = w[i++];
        if (auto eq = cur.find('='); eq != std::string::npos && cur.rfind("--", 0) == 0) {
            return {cur.substr(0, eq), cur.substr(eq + 1)};
        }
        if (valued.count(cur) != 0 && i < w.size()) return {cur, w[i++]};
        return {cur, ""};
    }
};

void set_if_empty(std::optional<int>& slot, std::optional<int> v) {
    if (!slot && v) slot = v;
}

class Scanner {
public:
    LaunchScan result;

    void script(std::string_view text) {
        for (const auto& cmd : split_commands(text)) command(cmd, 0);
    }

private:
    void command(const Words& w, std::size_t start) {
        for (std::size_t k = start; k < w.size(); ++k) note_constructs(w[k]);
        while (start < w.size() && is_assignment(w[start])) ++start;
        if (start >= w.size()) return;

        const std::string head = basename(w[start]);
        if (head == "srun") {
            srun(w, start + 1);
        } else if (head == "mpiexec" || head == "mpirun") {
            mpiexec(w, start + 1);
        } else if (head == "torchrun") {
            torchrun(w, start + 1);
        } else if (head == "deepspeed") {
            deepspeed(w, start + 1);
        } else if (head == "accelerate") {
            if (start + 1 < w.size() && w[start + 1] == "launch") accelerate(w, start + 2);
        } else if (head == "bash" || head == "sh") {
            for (std::size_t k = start + 1; k + 1 < w.size(); ++k) {
                if (w[k] == "-c") {
                    for (const auto& inner : split_commands(w[k + 1])) command(inner, 0);
                    break;
                }
            }
        } else if (is_python(head)) {
            python(w, start + 1, /*under_launcher=*/false);
        }
    }

    void note_constructs(const std::string& word) {
        if (word.find("$SLURM_") != std::string::npos || word.find("${SLURM_") != std::string::npos ||
            word.find("scontrol") != std::string::npos || basename(word) == "srun") {
            result.slurm_constructs = true;
        }
        if (word.find("$PBS_") != std::string::npos || word.find("${PBS_") != std::string::npos ||
            basename(word) == "qsub") {
            result.pbs_constructs = true;
        }
        if (auto pos = word.find("slots="); pos != std::string::npos) {
            std::size_t e = pos + 6;
            while (e < word.size() && std::isdigit(static_cast<unsigned char>(word[e]))) ++e;
            set_if_empty(result.per_node, parse_count(std::string_view(word).substr(pos + 6, e - pos - 6)));
        }
    }

    void set_launcher(Launcher l) {
        if (!result.launcher) result.launcher = l;
    }

    // DL launchers nested under srun/mpiexec take precedence over the wrapper.
    void set_inner_launcher(Launcher l) {
        if (!result.launcher || *result.launcher == Launcher::srun ||
            *result.launcher == Launcher::mpiexec) {
            result.launcher = l;
        }
    }

    // Program words after a launcher: entry script followed by training args.
    void program(const Words& w, std::size_t i) {
        if (i >= w.size()) return;
        if (is_python(w[i])) {
            python(w, i + 1, /*under_launcher=*/true);
            return;
        }
        tail(w, i);
    }

    void python(const Words& w, std::size_t i, bool under_launcher) {
        while (i < w.size() && w[i].size() > 1 && w[i][0] == '-' && w[i] != "-m") ++i;
        if (i + 1 < w.size() && w[i] == "-m") {
            const std::string& mod = w[i + 1];
            if (mod == "torch.distributed.run" || mod == "torch.distributed.launch") {
                torchrun(w, i + 2);
                return;
            }
            if (mod == "deepspeed.launcher.runner") {
                deepspeed(w, i + 2);
                return;
            }
            if (!under_launcher) return;
            i += 2;
            tail_args(w, i);
            return;
        }
        if (!under_launcher && result.launcher) return;
        tail(w, i);
    }

    void tail(const Words& w, std::size_t i) {
        if (i >= w.size()) return;
        if (!result.entry_script) result.entry_script = w[i];
        tail_args(w, i + 1);
    }

    void tail_args(const Words& w, std::size_t i) {
        Words args;
        for (; i < w.size(); ++i) {
            const std::string& a = w[i];
            if ((a == "--deepspeed" || a == "--deepspeed_config") && i + 1 < w.size()) {
                if (!result.deepspeed_config) result.deepspeed_config = w[i + 1];
                ++i;
                continue;
            }
            if (a.rfind("--deepspeed=", 0) == 0 || a.rfind("--deepspeed_config=", 0) == 0) {
                if (!result.deepspeed_config) result.deepspeed_config = a.substr(a.find('=') + 1);
                continue;
            }
            if (a == "--fsdp" && i + 1 < w.size()) {
                result.fsdp_flag = true;
                ++i;
                continue;
            }
            args.push_back(a);
        }
        // A trailing positional JSON file is the DeepSpeed config.
        if (!args.empty() && !result.deepspeed_config && args.back().size() > 5 &&
            args.back().compare(args.back().size() - 5, 5, ".json") == 0 &&
            args.back()[0] != '-' && (args.size() < 2 || args[args.size() - 2][0] != '-')) {
            result.deepspeed_config = args.back();
            args.pop_back();
        }
        if (result.train_args.empty()) {
            for (const auto& a : args) {
                if (!result.train_args.empty()) result.train_args += ' ';
                result.train_args += a;
            }
        }
    }

    void srun(const Words& w, std::size_t i) {
        static const std::set<std::string> valued{
            "-N", "-n", "-c", "-t", "-A", "-p", "-G", "-J", "-o", "-e", "-w", "-q",
            "--nodes", "--ntasks", "--ntasks-per-node", "--cpus-per-task", "--gpus",
            "--gpus-per-node", "--gpus-per-task", "--time", "--account", "--partition",
            "--gpu-bind", "--cpu-bind", "--mpi", "--export", "--nodelist", "--job-name",
            "--output", "--error", "--qos", "--distribution", "-m"};
        Options opt{w, i, valued};
        while (opt.at_option()) {
            auto [name, value] = opt.next();
            std::string n = name;
            // Glued short forms: -N2, -n8.
            if (value.empty() && n.size() > 2 && n[1] != '-' && (n[1] == 'N' || n[1] == 'n')) {
                value = n.substr(2);
                n = n.substr(0, 2);
            }
            if (n == "-N" || n == "--nodes") set_if_empty(result.alloc_nodes, parse_count(value));
            if (n == "-n" || n == "--ntasks") set_if_empty(result.srun_tasks, parse_count(value));
        }
        command(w, opt.i);
        set_launcher(Launcher::srun);
    }

    void mpiexec(const Words& w, std::size_t i) {
        static const std::set<std::string> valued{
            "-n", "-np", "-ppn", "--ppn", "-npernode", "--npernode", "-hostfile", "--hostfile",
            "-f", "-machinefile", "--depth", "-d", "--cpu-bind", "-envlist", "-genvlist",
            "-x", "--env", "-host", "--host", "-wdir", "--map-by", "--bind-to"};
        std::size_t k = i;
        while (k < w.size() && w[k].size() > 1 && w[k][0] == '-') {
            const std::string& o = w[k];
            if ((o == "-genv" || o == "-env") && k + 2 < w.size()) {
                if (w[k + 1] == "MASTER_PORT") set_if_empty(result.port, parse_count(w[k + 2]));
                k += 3;
                continue;
            }
            if (auto eq = o.find('='); eq != std::string::npos && o.rfind("--", 0) == 0) {
                ++k;
                continue;
            }
            if (valued.count(o) != 0 && k + 1 < w.size()) {
                const std::string& v = w[k + 1];
                if (o == "-n" || o == "-np") set_if_empty(result.world, parse_count(v));
                if (o == "-ppn" || o == "--ppn" || o == "-npernode" || o == "--npernode") {
                    set_if_empty(result.per_node, parse_count(v));
                }
                if ((o == "-x" || o == "--env") && v.rfind("MASTER_PORT=", 0) == 0) {
                    set_if_empty(result.port, parse_count(v.substr(12)));
                }
                k += 2;
                continue;
            }
            ++k;
        }
        if (k < w.size()) {
            const std::string head = basename(w[k]);
            if (head == "torchrun" || head == "deepspeed" || head == "accelerate") {
                command(w, k);
            } else {
                program(w, k);
            }
        }
        set_launcher(Launcher::mpiexec);
    }

    void torchrun(const Words& w, std::size_t i) {
        static const std::set<std::string> valued{
            "--nnodes", "--nproc_per_node", "--nproc-per-node", "--node_rank", "--node-rank",
            "--master_addr", "--master-addr", "--master_port", "--master-port",
            "--rdzv_endpoint", "--rdzv-endpoint", "--rdzv_backend", "--rdzv-backend",
            "--rdzv_id", "--rdzv-id", "--max_restarts", "--max-restarts", "--monitor_interval",
            "--log_dir", "--log-dir", "--role", "--local_addr", "--redirects", "--tee"};
        Options opt{w, i, valued};
        while (opt.at_option()) {
            auto [n, v] = opt.next();
            if (n == "--nnodes") set_if_empty(result.nodes, parse_count(v));
            if (n == "--nproc_per_node" || n == "--nproc-per-node") {
                set_if_empty(result.per_node, parse_count(v));
            }
            if (n == "--master_port" || n == "--master-port") set_if_empty(result.port, parse_count(v));
            if (n == "--rdzv_endpoint" || n == "--rdzv-endpoint") {
                if (auto colon = v.rfind(':'); colon != std::string::npos) {
                    set_if_empty(result.port, parse_count(std::string_view(v).substr(colon + 1)));
                }
            }
        }
        set_inner_launcher(Launcher::torchrun);
        program(w, opt.i);
    }

    void deepspeed(const Words& w, std::size_t i) {
        static const std::set<std::string> valued{
            "--hostfile", "-H", "--include", "-i", "--exclude", "-e", "--num_nodes",
            "--num_gpus", "--num_accelerators", "--master_port", "--master_addr",
            "--launcher", "--launcher_args", "--ssh_port", "--autotuning", "--min_elastic_nodes",
            "--max_elastic_nodes", "--node_rank"};
        Options opt{w, i, valued};
        while (opt.at_option()) {
            auto [n, v] = opt.next();
            if (n == "--num_nodes") set_if_empty(result.nodes, parse_count(v));
            if (n == "--num_gpus" || n == "--num_accelerators") {
                set_if_empty(result.per_node, parse_count(v));
            }
            if (n == "--master_port") set_if_empty(result.port, parse_count(v));
        }
        set_inner_launcher(Launcher::deepspeed);
        program(w, opt.i);
    }

    void accelerate(const Words& w, std::size_t i) {
        static const std::set<std::string> valued{
            "--num_machines", "--num_processes", "--machine_rank", "--main_process_ip",
            "--main_process_port", "--config_file", "--mixed_precision", "--gpu_ids",
            "--rdzv_backend", "--deepspeed_config_file", "--zero_stage", "--dynamo_backend",
            "--num_cpu_threads_per_process"};
        Options opt{w, i, valued};
        while (opt.at_option()) {
            auto [n, v] = opt.next();
            if (n == "--num_machines") set_if_empty(result.nodes, parse_count(v));
            if (n == "--num_processes") set_if_empty(result.world, parse_count(v));
            if (n == "--main_process_port") set_if_empty(result.port, parse_count(v));
        }
        set_inner_launcher(Launcher::accelerate);
        result.accelerate_launch = true;
        program(w, opt.i);
    }

};

}  // namespace

LaunchScan scan_launch(std::string_view script) {
    Scanner s;
    s.script(script);
    return s.result;
}

}  // namespace scriptport
