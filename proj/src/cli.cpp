#include "feather/cli.hpp"
#include "feather/tvl.hpp"

#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

namespace feather {

namespace {

std::string quote(const std::string& s)
{
    return '"' + s + '"';
}

std::string desc(const FeatureDesc& d)
{
    return d.is_variable ? d.text : quote(d.text);
}

std::string decomp_spec(const DecompSpec& s)
{
    std::string out = s.kind ? std::string(to_string(*s.kind)) : desc(*s.from) + "._decomp";
    if (s.sibling)
        out += " TO " + desc(*s.sibling);
    return out;
}

std::string value_spec(const ValueSpec& v)
{
    std::string out(to_string(v.kind));
    switch (v.kind) {
    case ValueKind::inherited: return out + ' ' + desc(v.source) + '.' + v.source_attr;
    case ValueKind::string: return out + ' ' + quote(v.text);
    default: return out + ' ' + v.expr.to_postfix();
    }
}

std::string constraint_desc(const ConstraintDesc& c)
{
    return desc(c.left) + ' ' + std::string(to_string(c.kind)) + ' ' + desc(c.right);
}

void dump_attributes(std::string& out, const std::string& owner, const std::vector<AttributeDecl>& attrs)
{
    for (const auto& a : attrs)
        out += "ATTR " + quote(owner) + ' ' + a.name + ' ' + format_literal(a.value) + '\n';
}

void dump_command(std::string& out, std::size_t index, const Command& cmd)
{
    out += "CMD " + std::to_string(index) + ' ' + std::string(cmd.code()) + '\n';
    if (!cmd.variables.empty()) {
        out += "  VARS";
        for (const auto& v : cmd.variables)
            out += ' ' + v;
        out += '\n';
    }
    auto set_feature_updates = [&](const FeatureUpdates& u) {
        if (u.name)
            out += "  SET _name " + quote(*u.name) + '\n';
        if (u.parent)
            out += "  SET _parent " + desc(*u.parent) + '\n';
        if (u.decomp)
            out += "  SET _decomp " + decomp_spec(*u.decomp) + '\n';
        for (const auto& a : u.attributes)
            out += "  SET " + a.name + ' ' + value_spec(a.value) + '\n';
    };
    auto set_constraint_updates = [&](const ConstraintUpdates& u) {
        if (u.left)
            out += "  SET leftfeature " + desc(*u.left) + '\n';
        if (u.kind)
            out += "  SET constrainttype " + std::string(to_string(*u.kind)) + '\n';
        if (u.right)
            out += "  SET rightfeature " + desc(*u.right) + '\n';
    };
    std::visit(
        [&](const auto& body) {
            using T = std::decay_t<decltype(body)>;
            if constexpr (std::is_same_v<T, AddFeatureCmd>) {
                out += "  NAME " + quote(body.name) + '\n';
                out += "  PARENT " + desc(body.parent) + '\n';
                out += "  DECOMP " + decomp_spec(body.decomp) + '\n';
                for (const auto& a : body.attributes)
                    out += "  ATTR " + a.name + ' ' + value_spec(a.value) + '\n';
            } else if constexpr (std::is_same_v<T, UpdateFeatureCmd>) {
                out += "  TARGET " + desc(body.target) + '\n';
                set_feature_updates(body.updates);
            } else if constexpr (std::is_same_v<T, RemoveFeatureCmd>) {
                out += "  TARGET " + desc(body.target) + '\n';
            } else if constexpr (std::is_same_v<T, UpdateConstraintCmd>) {
                out += "  CONSTRAINT " + constraint_desc(body.desc) + '\n';
                set_constraint_updates(body.updates);
            } else {
                out += "  CONSTRAINT " + constraint_desc(body.desc) + '\n';
            }
        },
        cmd.body);
    if (!cmd.where.empty())
        out += "  WHERE " + cmd.where.to_postfix() + '\n';
}

std::optional<std::string> read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        return std::nullopt;
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

bool write_file(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    out << text;
    out.close();
    return static_cast<bool>(out);
}

struct Config {
    RunMode mode = RunMode::stop_on_error;
    std::optional<std::string> script, decls, tvl, commands, out_feather, out_tvl;
    bool help = false;
    bool dump = false;
};

std::optional<std::string> parse_args(const std::vector<std::string>& args, Config& cfg)
{
    bool mode_set = false;
    for (std::size_t i = 0; i < args.size(); ++i) {
        const std::string& a = args[i];
        auto set_mode = [&](RunMode m) -> std::optional<std::string> {
            if (mode_set && cfg.mode != m)
                return "only one running mode can be given";
            mode_set = true;
            cfg.mode = m;
            return std::nullopt;
        };
        std::optional<std::string> problem;
        if (a == "-h") {
            cfg.help = true;
        } else if (a == "-i") {
            problem = set_mode(RunMode::ignore_all);
        } else if (a == "-e") {
            problem = set_mode(RunMode::stop_on_error);
        } else if (a == "-w") {
            problem = set_mode(RunMode::stop_on_warning);
        } else if (a == "-eil") {
            cfg.dump = true;
        } else if (a == "-f" || a == "-d" || a == "-t" || a == "-c" || a == "-o" || a == "-ot") {
            if (i + 1 >= args.size())
                return "option " + a + " needs a file name";
            auto& slot = a == "-f"   ? cfg.script
                         : a == "-d" ? cfg.decls
                         : a == "-t" ? cfg.tvl
                         : a == "-c" ? cfg.commands
                         : a == "-o" ? cfg.out_feather
                                     : cfg.out_tvl;
            if (slot)
                return "option " + a + " is given more than once";
            slot = args[++i];
        } else {
            return "unknown option " + a;
        }
        if (problem)
            return problem;
    }
    if (cfg.help)
        return std::nullopt;
    if (cfg.script && (cfg.decls || cfg.tvl || cfg.commands))
        return "-f cannot be combined with -d, -t or -c";
    if (cfg.decls && cfg.tvl)
        return "-d and -t cannot be combined";
    if (!cfg.script && !cfg.decls && !cfg.tvl)
        return cfg.commands ? "-c needs a declarations file (-d or -t)" : "no input file given";
    return std::nullopt;
}

void print_source_diagnostics(std::ostream& err, const std::string& file, const Diagnostics& diags)
{
    for (const auto& d : diags)
        err << file << ": " << d.render() << '\n';
}

} // namespace

std::string dump_intermediate(const Declarations& decls, const std::vector<Command>& commands)
{
    std::string out = "EIL 1.0\n";
    out += "FEATURES " + std::to_string(decls.features.size() + (decls.root.name.empty() ? 0 : 1)) + '\n';
    out += "CONSTRAINTS " + std::to_string(decls.constraints.size()) + '\n';
    out += "COMMANDS " + std::to_string(commands.size()) + '\n';
    if (!decls.root.name.empty()) {
        out += "ROOT " + quote(decls.root.name) + '\n';
        dump_attributes(out, decls.root.name, decls.root.attributes);
    }
    for (const auto& f : decls.features) {
        out += "FEATURE " + quote(f.name) + ' ' + quote(f.parent) + ' ' + std::string(to_string(f.decomp));
        if (f.group_sibling)
            out += " TO " + quote(*f.group_sibling);
        out += '\n';
        dump_attributes(out, f.name, f.attributes);
    }
    for (const auto& c : decls.constraints)
        out += "CONSTRAINT " + quote(c.left) + ' ' + std::string(to_string(c.kind)) + ' ' + quote(c.right) + '\n';
    for (std::size_t i = 0; i < commands.size(); ++i)
        dump_command(out, i + 1, commands[i]);
    return out;
}

std::string usage_text()
{
    return "-i : Running Mode - Ignore all errors & warnings\n"
           "-e : Running Mode - Stop on first error (ignore warnings)\n"
           "-w : Running Mode - Stop on first warning\n"
           "-f <feather-file> : Input Feather file (declarations + commands)\n"
           "-d <feather-declarations-file> : Input Feather declarations file\n"
           "-t <tvl-declarations-file> : Input TVL declarations file\n"
           "-c <feather-commands-file> : Input Feather commands file\n"
           "-o <feather-declarations-file> : Output Feather declarations file\n"
           "-ot <tvl-declarations-file> : Output TVL declarations file\n"
           "-eil : Write the intermediate listing next to the input file\n"
           "-h : Display this help message\n";
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    if (args.empty()) {
        out << usage_text();
        return 0;
    }
    Config cfg;
    if (auto problem = parse_args(args, cfg)) {
        err << "error: " << *problem << '\n' << usage_text();
        return 2;
    }
    if (cfg.help) {
        out << usage_text();
        return 0;
    }

    out << "*****\nFeather 1.0 Parser\n-----\n";

    auto load = [&](const std::string& path) -> std::optional<std::string> {
        out << "Parsing [" << path << "]... ";
        auto text = read_file(path);
        if (!text) {
            out << "FAILED\n";
            err << "error: cannot read " << path << '\n' << usage_text();
        }
        return text;
    };
    auto parse_failed = [&](const std::string& path, const Diagnostics& diags) {
        out << "FAILED\n";
        print_source_diagnostics(err, path, diags);
        return 2;
    };

    Declarations decls;
    std::vector<Command> commands;
    std::optional<FeatureModel> model;
    std::optional<std::string> string_type;
    std::string primary;

    if (cfg.script) {
        primary = *cfg.script;
        auto text = load(primary);
        if (!text)
            return 2;
        auto script = parse_script(*text);
        if (!script)
            return parse_failed(primary, script.error());
        if (auto diags = validate_static(*script); !diags.empty())
            return parse_failed(primary, diags);
        decls = script->declarations;
        commands = script->commands;
    } else {
        primary = cfg.decls ? *cfg.decls : *cfg.tvl;
        auto text = load(primary);
        if (!text)
            return 2;
        if (cfg.decls) {
            auto parsed = parse_declarations(*text);
            if (!parsed)
                return parse_failed(primary, parsed.error());
            if (auto diags = validate_static(*parsed); !diags.empty())
                return parse_failed(primary, diags);
            decls = *parsed;
        } else {
            auto doc = import_tvl(*text);
            if (!doc)
                return parse_failed(primary, doc.error());
            model = doc->model;
            string_type = doc->string_type;
            decls = parse_declarations(serialize_declarations(*model)).value();
        }
        out << "OK\n";
        if (cfg.commands) {
            auto ctext = load(*cfg.commands);
            if (!ctext)
                return 2;
            auto parsed = parse_commands(*ctext);
            if (!parsed)
                return parse_failed(*cfg.commands, parsed.error());
            if (auto diags = validate_static(*parsed); !diags.empty())
                return parse_failed(*cfg.commands, diags);
            commands = *parsed;
        }
    }
    if (cfg.script || cfg.commands)
        out << "OK\n";

    if (!model) {
        auto built = build_model(decls);
        if (!built) {
            out << "Building the model... FAILED\n";
            print_source_diagnostics(err, primary, built.error());
            return 2;
        }
        model = std::move(built).value();
    }

    if (cfg.dump) {
        std::string path = primary + ".eil";
        out << "Generating intermediate language code file [" << path << "]... ";
        if (!write_file(path, dump_intermediate(decls, commands))) {
            out << "FAILED\n";
            err << "error: cannot write " << path << '\n';
            return 2;
        }
    } else {
        out << "Generating intermediate representation... ";
    }
    out << "OK\nDONE!\n*****\n";

    out << "Executing the commands... ";
    RunResult run = run_script(*model, commands, cfg.mode);
    if (run.halted_at)
        out << "STOPPED at cmd #" << *run.halted_at << '\n';
    else
        out << "DONE!\n";
    if (!run.diagnostics.empty()) {
        out << "-----\nErrors & Warnings\n=====\n";
        for (const auto& d : run.diagnostics)
            out << d.render() << '\n';
        out << "-----\n";
    }

    if (cfg.out_feather || cfg.out_tvl) {
        out << "Saving the transformed model... ";
        std::vector<std::pair<std::string, std::string>> files;
        try {
            if (cfg.out_feather)
                files.emplace_back(*cfg.out_feather, serialize_declarations(*model));
            if (cfg.out_tvl)
                files.emplace_back(*cfg.out_tvl, export_tvl(*model, string_type));
        } catch (const std::invalid_argument& e) {
            out << "FAILED\n";
            err << "error: " << e.what() << '\n';
            return 2;
        }
        for (const auto& [path, text] : files)
            if (!write_file(path, text)) {
                out << "FAILED\n";
                err << "error: cannot write " << path << '\n' << usage_text();
                return 2;
            }
        out << "DONE!\n";
    }
    return run.halted_at || run.has_error() ? 1 : 0;
}

} // namespace feather
