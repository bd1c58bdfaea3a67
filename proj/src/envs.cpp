#include "confmdp/envs.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <fstream>
#include <sstream>

namespace confmdp {

// ---------------------------------------------------------------- two-chain

namespace two_chain {
double q1(double omega, double p) { return omega * p + (1.0 - omega) * (1.0 - p); }
double q2(double omega, double p) { return omega * (1.0 - p) + (1.0 - omega) * p; }
} // namespace two_chain

namespace {

TransitionModel two_chain_model(double omega, double p) {
    using namespace two_chain;
    TransitionModel m(4, 1);
    m(A, 0, B) = q1(omega, p);
    m(A, 0, D) = 1.0 - q1(omega, p);
    m(B, 0, C) = q2(omega, p);
    m(B, 0, D) = 1.0 - q2(omega, p);
    m(C, 0, D) = 1.0;
    m(D, 0, D) = 1.0;
    return m;
}

} // namespace

Problem build_two_chain(const TwoChainSpec& spec) {
    if (!(spec.p >= 0.0 && spec.p <= 1.0)) throw StructuralError("two_chain.p must lie in [0,1]");
    if (!(spec.omega0 >= 0.0 && spec.omega0 <= 1.0)) {
        throw StructuralError("two_chain.omega0 must lie in [0,1]");
    }
    Problem out;
    out.name = "two_chain";
    TabularConfMdp& mdp = out.mdp;
    mdp.n_states = 4;
    mdp.n_actions = 1;
    mdp.reward = {0.0, 0.0, 1.0, 0.0};
    mdp.gamma = spec.gamma;
    mdp.mu = {1.0, 0.0, 0.0, 0.0};
    mdp.delta_q = DeltaQMode::computed();
    mdp.validate();

    out.initial_policy = Policy::uniform(4, 1);
    out.model_space.vertices = {two_chain_model(1.0, spec.p), two_chain_model(0.0, spec.p)};
    out.initial_omega = numvec{spec.omega0, 1.0 - spec.omega0};
    out.initial_model = out.model_space.mix(*out.initial_omega);
    return out;
}

// ---------------------------------------------------------- Student-Teacher

StudentTeacherSpec StudentTeacherSpec::from_tuple(const std::string& text) {
    StudentTeacherSpec spec;
    int* fields[] = {&spec.n_literals, &spec.max_value, &spec.max_update, &spec.max_statement_literals};
    std::stringstream in(text);
    std::string part;
    std::size_t i = 0;
    while (std::getline(in, part, '-')) {
        if (i == 4) throw StructuralError("Student-Teacher tuple '" + text + "' has more than four fields");
        char* end = nullptr;
        const long v = std::strtol(part.c_str(), &end, 10);
        if (part.empty() || *end != '\0') {
            throw StructuralError("Student-Teacher tuple '" + text + "' has a non-integer field");
        }
        *fields[i++] = static_cast<int>(v);
    }
    if (i != 4) throw StructuralError("Student-Teacher tuple '" + text + "' needs four fields n-m-k-p");
    return spec;
}

void StudentTeacherSpec::validate() const {
    if (max_statement_literals < 2 || max_statement_literals > n_literals) {
        throw StructuralError("Student-Teacher: need 2 <= p <= n");
    }
    if (max_value < 1) throw StructuralError("Student-Teacher: need m >= 1");
    if (max_update < 1) throw StructuralError("Student-Teacher: need k >= 1");
    if (horizon < 1) throw StructuralError("Student-Teacher: need a positive horizon");
    if (!(gamma > 0.0 && gamma < 1.0)) throw StructuralError("Student-Teacher: gamma must lie in (0,1)");
}

StudentTeacherLayout student_teacher_layout(const StudentTeacherSpec& spec) {
    spec.validate();
    const int n = spec.n_literals, m = spec.max_value;
    StudentTeacherLayout out;
    // Examples by statement size, then literal subset in lexicographic order.
    for (int size = 2; size <= spec.max_statement_literals; ++size) {
        std::vector<int> subset(size);
        for (int i = 0; i < size; ++i) subset[i] = i;
        while (true) {
            for (int l = 0; l <= size * m; ++l) out.examples.push_back({subset, l});
            int i = size - 1;
            while (i >= 0 && subset[i] == n - size + i) --i;
            if (i < 0) break;
            ++subset[i];
            for (int j = i + 1; j < size; ++j) subset[j] = subset[j - 1] + 1;
        }
    }
    if (out.examples.empty()) throw StructuralError("Student-Teacher parameters produce no examples");
    // Assignments in lexicographic order, first literal most significant.
    std::vector<int> x(n, 0);
    while (true) {
        out.assignments.push_back(x);
        int i = n - 1;
        while (i >= 0 && x[i] == m) x[i--] = 0;
        if (i < 0) break;
        ++x[i];
    }
    return out;
}

bool satisfies(const Example& e, const std::vector<int>& assignment) {
    int sum = 0;
    for (int i : e.literals) sum += assignment[i];
    return sum == e.value;
}

Problem build_student_teacher(const StudentTeacherSpec& spec) {
    const StudentTeacherLayout layout = student_teacher_layout(spec);
    const std::size_t E = layout.examples.size();
    const std::size_t A = layout.assignments.size();
    const std::size_t S = E * A;

    Problem out;
    char name[64];
    std::snprintf(name, sizeof name, "student_teacher %d-%d-%d-%d", spec.n_literals, spec.max_value,
                  spec.max_update, spec.max_statement_literals);
    out.name = name;

    TabularConfMdp& mdp = out.mdp;
    mdp.n_states = S;
    mdp.n_actions = A;
    mdp.gamma = spec.gamma;
    mdp.horizon_constant = horizon_constant(spec.gamma, spec.horizon);
    mdp.delta_q = DeltaQMode::constant(mdp.horizon_constant);
    mdp.mu.assign(S, 1.0 / static_cast<double>(S));
    mdp.reward.assign(S * A, 0.0);

    maskvec allowed(S * A, 0);
    maskvec support(S * A * S, 0);
    out.initial_model = TransitionModel(S, A);
    for (std::size_t s = 0; s < S; ++s) {
        const Example& ex = layout.examples[layout.example_of(s)];
        const auto& current = layout.assignments[layout.assignment_of(s)];
        for (std::size_t a = 0; a < A; ++a) {
            const auto& next = layout.assignments[a];
            int change = 0;
            for (std::size_t i = 0; i < next.size(); ++i) change += std::abs(next[i] - current[i]);
            allowed[s * A + a] = change <= spec.max_update ? 1 : 0;
            mdp.reward[s * A + a] = satisfies(ex, next) ? 1.0 : 0.0;
            for (std::size_t e = 0; e < E; ++e) {
                const std::size_t t = layout.state(e, a);
                support[(s * A + a) * S + t] = 1;
                out.initial_model(s, a, t) = 1.0 / static_cast<double>(E);
            }
        }
    }
    mdp.validate();
    out.policy_space.support_mask = allowed;
    out.model_space.support = std::move(support);
    out.initial_policy = Policy::uniform(S, A, allowed);
    return out;
}

// ---------------------------------------------------------------- racetrack

TrackGrid parse_track(const std::string& text) {
    TrackGrid grid;
    std::vector<std::string> lines;
    std::stringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    if (lines.empty()) throw StructuralError("track: empty grid");
    grid.rows = lines.size();
    grid.cols = lines.front().size();
    bool has_initial = false, has_goal = false;
    for (std::size_t r = 0; r < lines.size(); ++r) {
        if (lines[r].size() != grid.cols) {
            throw StructuralError("track: row " + std::to_string(r + 1) + " has " +
                                  std::to_string(lines[r].size()) + " columns, expected " +
                                  std::to_string(grid.cols));
        }
        for (std::size_t c = 0; c < grid.cols; ++c) {
            const char ch = lines[r][c];
            if (ch < '1' || ch > '4') {
                throw StructuralError("track: invalid cell '" + std::string(1, ch) + "' at row " +
                                      std::to_string(r + 1) + ", column " + std::to_string(c + 1));
            }
            const auto cell = static_cast<TrackCell>(ch);
            has_initial |= cell == TrackCell::Initial;
            has_goal |= cell == TrackCell::Goal;
            grid.cells.push_back(cell);
        }
    }
    if (!has_initial) throw StructuralError("track: no initial cell");
    if (!has_goal) throw StructuralError("track: no goal cell");
    return grid;
}

TrackGrid load_track(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw StructuralError("cannot read track file " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
        return parse_track(buffer.str());
    } catch (const StructuralError& e) {
        throw StructuralError(path.string() + ": " + e.what());
    }
}

namespace {

struct NamedVertex {
    RacetrackVertex value;
    const char* name;
};

constexpr NamedVertex kVertexNames[] = {
    {RacetrackVertex::HsB, "hs_b"},
    {RacetrackVertex::HsNb, "hs_nb"},
    {RacetrackVertex::LsB, "ls_b"},
    {RacetrackVertex::LsNb, "ls_nb"},
};

bool high_speed_stability(RacetrackVertex v) { return v == RacetrackVertex::HsB || v == RacetrackVertex::HsNb; }
bool boosted(RacetrackVertex v) { return v == RacetrackVertex::HsB || v == RacetrackVertex::LsB; }

// Velocity change per action: keep, +vx, +vy, -vx, -vy (x = column, y = row).
constexpr int kDeltaRow[kRacetrackActions] = {0, 0, 1, 0, -1};
constexpr int kDeltaCol[kRacetrackActions] = {0, 1, 0, -1, 0};

class RacetrackBuilder {
public:
    explicit RacetrackBuilder(const RacetrackSpec& spec) : spec_(spec) {
        int factor = 1;
        for (auto v : spec.vertices) {
            if (boosted(v)) factor = std::max(factor, spec.boost_speed_factor);
        }
        lo_ = spec.v_min * factor;
        hi_ = spec.v_max * factor;
        span_ = static_cast<std::size_t>(hi_ - lo_ + 1);
        index_.assign(spec.grid.rows * spec.grid.cols * span_ * span_, kUnset);
    }

    Problem build(RacetrackLayout* layout_out) {
        enumerate();
        const std::size_t S = states_.size() + 1;
        const std::size_t terminal = S - 1;
        const std::size_t A = kRacetrackActions;

        Problem out;
        out.name = "racetrack";
        TabularConfMdp& mdp = out.mdp;
        mdp.n_states = S;
        mdp.n_actions = A;
        mdp.gamma = spec_.gamma;
        mdp.delta_q = spec_.delta_q > 0.0 ? DeltaQMode::constant(spec_.delta_q) : DeltaQMode::computed();
        mdp.reward.assign(S * A, 0.0);
        mdp.mu.assign(S, 0.0);
        for (std::size_t s : initial_) mdp.mu[s] = 1.0 / static_cast<double>(initial_.size());

        for (auto vertex : spec_.vertices) {
            TransitionModel m(S, A);
            for (std::size_t s = 0; s < states_.size(); ++s) {
                for (std::size_t a = 0; a < A; ++a) {
                    for (const auto& [t, prob] : outcomes(states_[s], a, vertex)) {
                        m(s, a, t == kTerminal ? terminal : t) += prob;
                    }
                }
            }
            for (std::size_t a = 0; a < A; ++a) m(terminal, a, terminal) = 1.0;
            out.model_space.vertices.push_back(std::move(m));
        }
        for (std::size_t s = 0; s < states_.size(); ++s) {
            if (at_goal(states_[s])) {
                for (std::size_t a = 0; a < A; ++a) mdp.reward[s * A + a] = 1.0;
            }
        }
        mdp.validate();

        numvec omega = spec_.omega0;
        if (omega.empty()) {
            // Start from the no-boost vertices, or uniform if none was requested.
            std::size_t nb = 0;
            for (auto v : spec_.vertices) nb += boosted(v) ? 0 : 1;
            for (auto v : spec_.vertices) {
                if (nb == 0) {
                    omega.push_back(1.0 / static_cast<double>(spec_.vertices.size()));
                } else {
                    omega.push_back(boosted(v) ? 0.0 : 1.0 / static_cast<double>(nb));
                }
            }
        }
        out.initial_omega = omega;
        out.initial_model = out.model_space.mix(omega);
        out.initial_policy = Policy::uniform(S, A);

        if (layout_out) {
            layout_out->states = states_;
            RacetrackState t;
            t.terminal = true;
            layout_out->states.push_back(t);
        }
        return out;
    }

private:
    static constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
    static constexpr std::size_t kTerminal = static_cast<std::size_t>(-2);

    std::size_t key(const RacetrackState& st) const {
        return ((static_cast<std::size_t>(st.row) * spec_.grid.cols + static_cast<std::size_t>(st.col)) * span_ +
                static_cast<std::size_t>(st.vr - lo_)) *
                   span_ +
               static_cast<std::size_t>(st.vc - lo_);
    }

    bool at_goal(const RacetrackState& st) const {
        return spec_.grid.at(st.row, st.col) == TrackCell::Goal;
    }

    std::size_t intern(const RacetrackState& st, std::deque<std::size_t>* frontier) {
        std::size_t& slot = index_[key(st)];
        if (slot == kUnset) {
            slot = states_.size();
            states_.push_back(st);
            if (frontier) frontier->push_back(slot);
        }
        return slot;
    }

    // Position and velocity after applying velocity change `a` under the given cap.
    RacetrackState move(const RacetrackState& st, std::size_t a, int cap_lo, int cap_hi) const {
        const int vr = std::clamp(st.vr + kDeltaRow[a], cap_lo, cap_hi);
        const int vc = std::clamp(st.vc + kDeltaCol[a], cap_lo, cap_hi);
        const int n = std::max(std::abs(vr), std::abs(vc));
        const TrackGrid& g = spec_.grid;
        for (int t = 1; t <= n; ++t) {
            const int r = st.row + static_cast<int>(std::lround(static_cast<double>(vr) * t / n));
            const int c = st.col + static_cast<int>(std::lround(static_cast<double>(vc) * t / n));
            if (r < 0 || c < 0 || r >= static_cast<int>(g.rows) || c >= static_cast<int>(g.cols) ||
                g.at(r, c) == TrackCell::Wall) {
                return {st.row, st.col, 0, 0, false};
            }
            if (g.at(r, c) == TrackCell::Goal) return {r, c, 0, 0, false};
        }
        return {st.row + vr, st.col + vc, vr, vc, false};
    }

    // Distribution over successor states; new states are interned on the fly.
    std::vector<std::pair<std::size_t, double>> outcomes(const RacetrackState& st, std::size_t a,
                                                         RacetrackVertex vertex,
                                                         std::deque<std::size_t>* frontier = nullptr) {
        std::vector<std::pair<std::size_t, double>> out;
        if (at_goal(st)) {
            out.emplace_back(kTerminal, 1.0);
            return out;
        }
        const bool boost = boosted(vertex);
        const double failure = boost ? spec_.boost_failure : spec_.no_boost_failure;
        const int factor = boost ? spec_.boost_speed_factor : 1;
        const int speed = std::max(std::abs(st.vr), std::abs(st.vc));
        const bool low = speed < spec_.speed_threshold;
        const double success = high_speed_stability(vertex) ? (low ? spec_.hs_low : spec_.hs_high)
                                                            : (low ? spec_.ls_low : spec_.ls_high);
        if (failure > 0.0) out.emplace_back(kTerminal, failure);
        const double slip = (1.0 - success) / static_cast<double>(kRacetrackActions);
        for (std::size_t b = 0; b < kRacetrackActions; ++b) {
            const double prob = (1.0 - failure) * ((b == a ? success : 0.0) + slip);
            if (prob == 0.0) continue;
            const RacetrackState next = move(st, b, spec_.v_min * factor, spec_.v_max * factor);
            out.emplace_back(intern(next, frontier), prob);
        }
        return out;
    }

    void enumerate() {
        std::deque<std::size_t> frontier;
        const TrackGrid& g = spec_.grid;
        for (std::size_t r = 0; r < g.rows; ++r) {
            for (std::size_t c = 0; c < g.cols; ++c) {
                if (g.at(r, c) == TrackCell::Initial) {
                    initial_.push_back(intern({static_cast<int>(r), static_cast<int>(c), 0, 0, false}, &frontier));
                }
            }
        }
        while (!frontier.empty()) {
            const RacetrackState st = states_[frontier.front()];
            frontier.pop_front();
            for (auto vertex : spec_.vertices) {
                for (std::size_t a = 0; a < kRacetrackActions; ++a) outcomes(st, a, vertex, &frontier);
            }
        }
    }

    const RacetrackSpec& spec_;
    int lo_ = 0, hi_ = 0;
    std::size_t span_ = 0;
    std::vector<std::size_t> index_;
    std::vector<RacetrackState> states_;
    std::vector<std::size_t> initial_;
};

} // namespace

std::string to_string(RacetrackVertex v) {
    for (const auto& entry : kVertexNames) {
        if (entry.value == v) return entry.name;
    }
    return "unknown";
}

RacetrackVertex parse_racetrack_vertex(const std::string& name) {
    for (const auto& entry : kVertexNames) {
        if (name == entry.name) return entry.value;
    }
    throw StructuralError("unknown racetrack vertex '" + name + "'");
}

void RacetrackSpec::validate() const {
    if (grid.cells.empty()) throw StructuralError("racetrack: empty grid");
    if (v_min > 0 || v_max < 0 || v_min >= v_max) throw StructuralError("racetrack: need v_min <= 0 <= v_max");
    for (double p : {hs_low, hs_high, ls_low, ls_high, boost_failure, no_boost_failure}) {
        if (!(p >= 0.0 && p <= 1.0)) throw StructuralError("racetrack: probabilities must lie in [0,1]");
    }
    if (boost_speed_factor < 1) throw StructuralError("racetrack: boost speed factor must be >= 1");
    if (vertices.empty()) throw StructuralError("racetrack: no vertex models");
    if (!omega0.empty()) {
        if (omega0.size() != vertices.size()) {
            throw StructuralError("racetrack: omega0 size does not match the vertex set");
        }
        check_simplex(omega0, "racetrack omega0");
    }
    if (!(gamma > 0.0 && gamma < 1.0)) throw StructuralError("racetrack: gamma must lie in (0,1)");
}

Problem build_racetrack(const RacetrackSpec& spec, RacetrackLayout* layout) {
    spec.validate();
    return RacetrackBuilder(spec).build(layout);
}

// ------------------------------------------------------------------- random

numvec random_distribution(std::mt19937_64& rng, std::size_t width, double density) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    numvec row(width, 0.0);
    double sum = 0.0;
    for (std::size_t i = 0; i < width; ++i) {
        const double keep = unit(rng);
        const double value = unit(rng);
        if (keep < density) {
            row[i] = value + 1e-3;
            sum += row[i];
        }
    }
    if (sum == 0.0) {
        std::uniform_int_distribution<std::size_t> pick(0, width - 1);
        row[pick(rng)] = 1.0;
        return row;
    }
    for (double& x : row) x /= sum;
    return row;
}

Policy random_policy(std::mt19937_64& rng, std::size_t states, std::size_t actions, double density) {
    Policy pi(states, actions);
    for (std::size_t s = 0; s < states; ++s) {
        const numvec row = random_distribution(rng, actions, density);
        std::copy(row.begin(), row.end(), pi.pi.begin() + static_cast<std::ptrdiff_t>(s * actions));
    }
    return pi;
}

TransitionModel random_model(std::mt19937_64& rng, std::size_t states, std::size_t actions, double density) {
    TransitionModel m(states, actions);
    for (std::size_t sa = 0; sa < states * actions; ++sa) {
        const numvec row = random_distribution(rng, states, density);
        std::copy(row.begin(), row.end(), m.p.begin() + static_cast<std::ptrdiff_t>(sa * states));
    }
    return m;
}

Problem build_random(const RandomSpec& spec) {
    if (spec.n_states < 1 || spec.n_actions < 1) throw StructuralError("random: sizes must be >= 1");
    if (!(spec.density > 0.0 && spec.density <= 1.0)) throw StructuralError("random: density must lie in (0,1]");
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::size_t S = spec.n_states, A = spec.n_actions;

    Problem out;
    out.name = "random";
    TabularConfMdp& mdp = out.mdp;
    mdp.n_states = S;
    mdp.n_actions = A;
    mdp.gamma = spec.gamma;
    mdp.delta_q = spec.computed_delta_q ? DeltaQMode::computed() : DeltaQMode::constant(1.0 / (1.0 - spec.gamma));
    mdp.reward.resize(S * A);
    for (double& r : mdp.reward) r = unit(rng);
    mdp.mu = random_distribution(rng, S, 1.0);
    mdp.validate();

    out.initial_policy = random_policy(rng, S, A, 1.0);
    if (spec.vertices == 0) {
        out.initial_model = random_model(rng, S, A, spec.density);
    } else {
        for (std::size_t i = 0; i < spec.vertices; ++i) {
            out.model_space.vertices.push_back(random_model(rng, S, A, spec.density));
        }
        out.initial_omega = random_distribution(rng, spec.vertices, 1.0);
        out.initial_model = out.model_space.mix(*out.initial_omega);
    }
    return out;
}

} // namespace confmdp
