#include "bigprob/export.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <variant>

#include <nlohmann/json.hpp>

namespace bigprob {

namespace {

// MDP rows as exported: terminal states get a `tau` self-loop.
std::vector<std::vector<Choice>> export_choices(const TransitionSystem& ts) {
    auto out = ts.choices;
    for (std::size_t s = 0; s < out.size(); ++s)
        if (out[s].empty()) out[s].push_back(Choice{"tau", Scalar(0), {Transition{static_cast<int>(s), Scalar(1)}}});
    return out;
}

// Redirects every rewarded choice into a copy of its target that carries the
// action reward as state reward and a `via_<action>` marker label.
TransitionSystem fold_action_rewards(const TransitionSystem& ts) {
    std::map<std::pair<int, std::string>, int> copies;
    std::map<std::string, Scalar> action_reward;
    for (const auto& cs : ts.choices)
        for (const auto& c : cs)
            if (!c.reward.is_zero()) {
                action_reward.emplace(c.action, c.reward);
                for (const auto& t : c.distribution) copies.emplace(std::make_pair(t.target, c.action), -1);
            }
    if (copies.empty()) return ts;

    TransitionSystem out = ts;
    std::map<std::string, int> marker;
    for (const auto& [action, r] : action_reward) {
        marker[action] = static_cast<int>(out.label_names.size());
        out.label_names.push_back("via_" + action);
    }
    for (auto& [key, id] : copies) {
        id = static_cast<int>(out.states.size());
        out.states.push_back(ts.states[key.first]);
        auto labels = ts.labels.empty() ? std::vector<int>{} : ts.labels[key.first];
        labels.push_back(marker[key.second]);
        std::sort(labels.begin(), labels.end());
        out.labels.push_back(std::move(labels));
        Scalar base = ts.state_reward.empty() ? Scalar(0) : ts.state_reward[key.first];
        out.state_reward.push_back(base + action_reward[key.second]);
    }
    out.labels.resize(out.states.size());
    out.state_reward.resize(out.states.size(), Scalar(0));
    out.choices.resize(out.states.size());
    for (std::size_t s = 0; s < out.states.size(); ++s) {
        int origin = s < ts.size() ? static_cast<int>(s) : -1;
        if (origin < 0)
            for (const auto& [key, id] : copies)
                if (id == static_cast<int>(s)) origin = key.first;
        auto cs = ts.choices[origin];
        for (auto& c : cs) {
            if (!c.reward.is_zero())
                for (auto& t : c.distribution) t.target = copies.at({t.target, c.action});
            c.reward = Scalar(0);
            std::sort(c.distribution.begin(), c.distribution.end(),
                      [](const Transition& a, const Transition& b) { return a.target < b.target; });
        }
        out.choices[s] = std::move(cs);
    }
    return out;
}

std::string prism_label(const std::string& name) {
    std::string out;
    for (char c : name) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out;
}

}  // namespace

PrismBundle export_prism(const TransitionSystem& input, const PrismOptions& options) {
    const bool mdp = input.kind == ModelKind::Mdp;
    TransitionSystem folded;
    if (mdp && options.rewards_as_states) folded = fold_action_rewards(input);
    const TransitionSystem& t = mdp && options.rewards_as_states ? folded : input;
    const std::size_t n = t.size();

    PrismBundle bundle;
    std::ostringstream tra;
    if (mdp) {
        auto choices = export_choices(t);
        std::size_t nc = 0, nt = 0;
        for (const auto& cs : choices) {
            nc += cs.size();
            for (const auto& c : cs) nt += c.distribution.size();
        }
        tra << n << ' ' << nc << ' ' << nt << '\n';
        std::ostringstream trew;
        std::size_t nrew = 0;
        for (std::size_t s = 0; s < n; ++s)
            for (std::size_t ci = 0; ci < choices[s].size(); ++ci) {
                const auto& c = choices[s][ci];
                for (const auto& tr : c.distribution) {
                    tra << s << ' ' << ci << ' ' << tr.target << ' ' << format_17g(tr.value.value()) << ' '
                        << c.action << '\n';
                    if (!c.reward.is_zero()) {
                        trew << s << ' ' << ci << ' ' << tr.target << ' ' << format_17g(c.reward.value()) << '\n';
                        ++nrew;
                    }
                }
            }
        if (nrew > 0) bundle.trew = std::to_string(n) + ' ' + std::to_string(nc) + ' ' + std::to_string(nrew) + '\n' + trew.str();
    } else {
        std::size_t nt = 0;
        for (const auto& row : t.rows) nt += row.size();
        tra << n << ' ' << nt << '\n';
        for (std::size_t s = 0; s < n; ++s)
            for (const auto& tr : t.rows[s]) tra << s << ' ' << tr.target << ' ' << format_17g(tr.value.value()) << '\n';
    }
    bundle.tra = tra.str();

    std::ostringstream lab;
    lab << "0=\"init\"";
    for (std::size_t i = 0; i < t.label_names.size(); ++i) lab << ' ' << i + 1 << "=\"" << prism_label(t.label_names[i]) << '"';
    lab << '\n';
    for (std::size_t s = 0; s < n; ++s) {
        std::vector<int> ids;
        if (s == 0) ids.push_back(0);
        if (s < t.labels.size())
            for (int l : t.labels[s]) ids.push_back(l + 1);
        if (ids.empty()) continue;
        lab << s << ':';
        for (int id : ids) lab << ' ' << id;
        lab << '\n';
    }
    bundle.lab = lab.str();

    std::ostringstream srew;
    std::size_t nonzero = 0;
    for (std::size_t s = 0; s < t.state_reward.size(); ++s)
        if (!t.state_reward[s].is_zero()) {
            srew << s << ' ' << format_17g(t.state_reward[s].value()) << '\n';
            ++nonzero;
        }
    if (nonzero > 0) bundle.srew = std::to_string(n) + ' ' + std::to_string(nonzero) + '\n' + srew.str();
    return bundle;
}

std::map<std::string, std::string> write_bundle(const PrismBundle& bundle, const std::string& dir,
                                                const std::string& stem) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error("cannot create directory " + dir + ": " + ec.message());
    std::map<std::string, std::string> manifest;
    auto put = [&](const std::string& role, const std::string& ext, const std::string& text) {
        std::string path = (fs::path(dir) / (stem + ext)).string();
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out << text;
        if (!out) throw Error("cannot write " + path);
        manifest[role] = path;
    };
    put("tra", ".tra", bundle.tra);
    put("lab", ".lab", bundle.lab);
    if (bundle.srew) put("srew", ".srew", *bundle.srew);
    if (bundle.trew) put("trew", ".trew", *bundle.trew);
    return manifest;
}

TransitionSystem import_prism(ModelKind kind, const std::string& tra, const std::string& lab,
                              const std::optional<std::string>& srew, const std::optional<std::string>& trew) {
    auto bad = [](const std::string& what) -> Error { return Error("malformed " + what + " file"); };
    TransitionSystem ts;
    ts.kind = kind;
    std::istringstream in(tra);
    std::size_t n = 0, nt = 0, nc = 0;
    if (!(in >> n)) throw bad("tra");
    if (kind == ModelKind::Mdp && !(in >> nc)) throw bad("tra");
    if (!(in >> nt)) throw bad("tra");
    ts.states.resize(n);
    ts.labels.assign(n, {});
    ts.state_reward.assign(n, Scalar(0));
    if (kind == ModelKind::Mdp)
        ts.choices.resize(n);
    else
        ts.rows.resize(n);
    for (std::size_t i = 0; i < nt; ++i) {
        std::size_t src = 0, dst = 0, ci = 0;
        std::string value, action;
        if (!(in >> src)) throw bad("tra");
        if (kind == ModelKind::Mdp && !(in >> ci)) throw bad("tra");
        if (!(in >> dst >> value)) throw bad("tra");
        if (kind == ModelKind::Mdp && !(in >> action)) throw bad("tra");
        if (src >= n || dst >= n) throw bad("tra");
        Transition t{static_cast<int>(dst), Scalar(std::stod(value))};
        if (kind == ModelKind::Mdp) {
            auto& cs = ts.choices[src];
            if (ci > cs.size()) throw bad("tra");
            if (ci == cs.size()) cs.push_back(Choice{action, Scalar(0), {}});
            cs[ci].distribution.push_back(t);
        } else {
            ts.rows[src].push_back(t);
        }
    }

    std::istringstream lin(lab);
    std::string header;
    std::getline(lin, header);
    std::map<int, int> id_map;  // file id -> label index
    for (std::size_t pos = 0; pos < header.size();) {
        auto eq = header.find("=\"", pos);
        if (eq == std::string::npos) break;
        int id = std::stoi(header.substr(pos, eq - pos));
        std::string name;
        std::size_t k = eq + 2;
        for (; k < header.size() && header[k] != '"'; ++k) {
            if (header[k] == '\\' && k + 1 < header.size()) ++k;
            name += header[k];
        }
        if (k >= header.size()) throw bad("lab");
        pos = k + 1;
        while (pos < header.size() && header[pos] == ' ') ++pos;
        if (id == 0 && name == "init") continue;
        id_map[id] = static_cast<int>(ts.label_names.size());
        ts.label_names.push_back(name);
    }
    for (std::string line; std::getline(lin, line);) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::size_t s = 0;
        char colon = 0;
        if (!(ls >> s >> colon) || colon != ':' || s >= n) throw bad("lab");
        for (int id; ls >> id;)
            if (auto it = id_map.find(id); it != id_map.end()) ts.labels[s].push_back(it->second);
        std::sort(ts.labels[s].begin(), ts.labels[s].end());
    }

    if (srew) {
        std::istringstream rin(*srew);
        std::size_t rn = 0, nz = 0;
        if (!(rin >> rn >> nz) || rn != n) throw bad("srew");
        for (std::size_t i = 0; i < nz; ++i) {
            std::size_t s = 0;
            std::string v;
            if (!(rin >> s >> v) || s >= n) throw bad("srew");
            ts.state_reward[s] = Scalar(std::stod(v));
        }
    }
    if (trew && kind == ModelKind::Mdp) {
        std::istringstream rin(*trew);
        std::size_t rn = 0, rc = 0, nz = 0;
        if (!(rin >> rn >> rc >> nz) || rn != n) throw bad("trew");
        for (std::size_t i = 0; i < nz; ++i) {
            std::size_t s = 0, ci = 0, d = 0;
            std::string v;
            if (!(rin >> s >> ci >> d >> v) || s >= n || ci >= ts.choices[s].size()) throw bad("trew");
            ts.choices[s][ci].reward = Scalar(std::stod(v));
        }
    }
    return ts;
}

std::string export_dot(const TransitionSystem& ts) {
    auto quote = [](const std::string& s) {
        std::string out = "\"";
        for (char c : s) {
            if (c == '"' || c == '\\') out += '\\';
            out += c;
        }
        return out + "\"";
    };
    std::ostringstream out;
    out << "digraph " << to_string(ts.kind) << " {\n";
    for (std::size_t s = 0; s < ts.size(); ++s) {
        std::string text = std::to_string(s);
        if (s < ts.labels.size() && !ts.labels[s].empty()) {
            text += "\\n";
            for (std::size_t i = 0; i < ts.labels[s].size(); ++i)
                text += (i ? "," : "") + ts.label_names[ts.labels[s][i]];
        }
        out << "  s" << s << " [label=\"";
        for (char c : text) {
            if (c == '"') out << '\\';
            out << c;
        }
        out << "\"];\n";
    }
    for (std::size_t s = 0; s < ts.size(); ++s) {
        if (ts.kind == ModelKind::Mdp) {
            for (const auto& c : ts.choices[s])
                for (const auto& t : c.distribution)
                    out << "  s" << s << " -> s" << t.target << " [label="
                        << quote(c.action + ":" + format_shortest(t.value.value())) << "];\n";
        } else {
            for (const auto& t : ts.rows[s])
                out << "  s" << s << " -> s" << t.target << " [label=" << quote(format_shortest(t.value.value()))
                    << "];\n";
        }
    }
    out << "}\n";
    return out.str();
}

namespace {

using ojson = nlohmann::ordered_json;

ojson place_json(Place p) { return {{p.is_region() ? "region" : "node", p.index}}; }

ojson interface_json(const Interface& face) { return {{"width", face.width}, {"names", face.names}}; }

ojson bigraph_object(const Bigraph& g) {
    ojson nodes = ojson::array();
    for (int v = 0; v < g.node_count(); ++v) {
        const Control& c = g.control(v);
        ojson params = ojson::array();
        for (const auto& p : c.params) std::visit([&](auto x) { params.push_back(x); }, p);
        ojson ports = ojson::array();
        for (int i = 0; i < g.arity(v); ++i) ports.push_back(g.port_link(v, i));
        nodes.push_back({{"id", v},
                         {"control", c.name},
                         {"params", std::move(params)},
                         {"atomic", c.atomic},
                         {"parent", place_json(g.parent(v))},
                         {"ports", std::move(ports)}});
    }
    ojson sites = ojson::array();
    for (int s = 0; s < g.site_count(); ++s) sites.push_back({{"id", s}, {"parent", place_json(g.site_parent(s))}});
    std::vector<std::vector<std::string>> inner(g.link_count());
    for (const auto& [name, link] : g.inner_links()) inner[link].push_back(name);
    ojson links = ojson::array();
    for (int l = 0; l < g.link_count(); ++l) {
        ojson link = {{"id", l}};
        link["name"] = g.link_name(l) ? ojson(*g.link_name(l)) : ojson(nullptr);
        link["inner"] = inner[l];
        links.push_back(std::move(link));
    }
    return {{"outer", interface_json(g.outer_face())},
            {"inner", interface_json(g.inner_face())},
            {"nodes", std::move(nodes)},
            {"sites", std::move(sites)},
            {"links", std::move(links)}};
}

}  // namespace

std::string bigraph_json(const Bigraph& g) { return bigraph_object(g).dump(2) + "\n"; }

std::string export_json(const TransitionSystem& ts) {
    using json = ojson;
    auto number = [](const Scalar& v) {
        json j = v.value();
        return j;
    };
    auto with_exact = [&](json& j, const char* field, const Scalar& v) {
        j[field] = number(v);
        if (v.exact() && v.exact()->den() != 1) j[std::string(field) + "_exact"] = v.exact()->str();
    };
    const char* field = ts.kind == ModelKind::Ctmc ? "rate" : "probability";
    json root;
    root["kind"] = to_string(ts.kind);
    root["initial"] = 0;
    root["labels"] = ts.label_names;
    json states = json::array();
    for (std::size_t s = 0; s < ts.size(); ++s) {
        json st;
        st["id"] = s;
        st["key"] = ts.states[s].key;
        json names = json::array();
        if (s < ts.labels.size())
            for (int l : ts.labels[s]) names.push_back(ts.label_names[l]);
        st["labels"] = names;
        st["reward"] = number(s < ts.state_reward.size() ? ts.state_reward[s] : Scalar(0));
        st["bigraph"] = bigraph_object(ts.states[s].bigraph);
        states.push_back(std::move(st));
    }
    root["states"] = std::move(states);
    if (ts.kind == ModelKind::Mdp) {
        json choices = json::array();
        for (std::size_t s = 0; s < ts.size(); ++s)
            for (const auto& c : ts.choices[s]) {
                json cj;
                cj["source"] = s;
                cj["action"] = c.action;
                cj["reward"] = number(c.reward);
                json dist = json::array();
                for (const auto& t : c.distribution) {
                    json tj;
                    tj["target"] = t.target;
                    with_exact(tj, field, t.value);
                    dist.push_back(std::move(tj));
                }
                cj["distribution"] = std::move(dist);
                choices.push_back(std::move(cj));
            }
        root["choices"] = std::move(choices);
    } else {
        json transitions = json::array();
        for (std::size_t s = 0; s < ts.size(); ++s)
            for (const auto& t : ts.rows[s]) {
                json tj;
                tj["source"] = s;
                tj["target"] = t.target;
                if (ts.kind != ModelKind::Brs) with_exact(tj, field, t.value);
                transitions.push_back(std::move(tj));
            }
        root["transitions"] = std::move(transitions);
    }
    return root.dump(2) + "\n";
}

}  // namespace bigprob
