#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "dagsched/dag.hpp"
#include "dagsched/errors.hpp"
#include "dagsched/instance.hpp"
#include "dagsched/schedule.hpp"

namespace dagsched {

// One linear row: sum(coefficient * column) <sense> rhs, sense in {'<','=','>'}
// meaning <=, =, >=. Term columns are strictly increasing; zero coefficients
// are dropped at assembly.
struct IlpRow {
    std::string id;
    std::vector<std::pair<int, double>> terms;
    char sense = '<';
    double rhs = 0.0;
};

// Time-indexed 0/1 model minimizing CMAX. Column layout, in registration
// order: X[j,i,t] task j starts at t on machine i; Y[f,c,t] flow f starts at
// t on channel c (0 = virtual); PSI[j,j',i] both tasks on machine i (j < j');
// SIG[j,j'] task j starts no later than j' (ordered); CHI[f,f',k] both flows
// on real channel k (f < f'); PHI[f,f'] flow f starts no later than f'
// (ordered); CMAX. Time slots are 0-based: t in 0..horizon-1.
struct IlpModel {
    Instance instance;
    Time horizon = 0;  // also the big-M constant
    double epsilon = 0.5;
    std::vector<std::string> columns;
    std::vector<bool> binary;
    std::vector<IlpRow> rows;

    int tasks() const { return instance.graph.task_count(); }
    int flows() const { return instance.graph.edge_count(); }
    int machines() const { return instance.machines; }
    int channels() const { return instance.channels; }

    int x_column(int j, int machine, Time t) const {
        return static_cast<int>((static_cast<Time>(j) * machines() + (machine - 1)) * horizon + t);
    }
    int y_column(int f, int channel, Time t) const {
        const Time base = static_cast<Time>(tasks()) * machines() * horizon;
        return static_cast<int>(base + (static_cast<Time>(f) * (channels() + 1) + channel) * horizon + t);
    }
    int psi_column(int j, int jp, int machine) const {
        return y_column(flows(), 0, 0) + unordered_rank(j, jp, tasks()) * machines() + (machine - 1);
    }
    int sig_column(int j, int jp) const { return sig_base() + ordered_rank(j, jp, tasks()); }
    int chi_column(int f, int fp, int channel) const {
        return sig_base() + tasks() * (tasks() - 1) + unordered_rank(f, fp, flows()) * channels() + (channel - 1);
    }
    int phi_column(int f, int fp) const {
        return sig_base() + tasks() * (tasks() - 1) + pair_count(flows()) * channels() +
               ordered_rank(f, fp, flows());
    }
    int cmax_column() const { return static_cast<int>(columns.size()) - 1; }

    static int pair_count(int n) { return n * (n - 1) / 2; }
    static int unordered_rank(int a, int b, int n) {  // a != b, order-insensitive
        if (a > b) std::swap(a, b);
        return a * n - a * (a + 1) / 2 + (b - a - 1);
    }
    static int ordered_rank(int a, int b, int n) { return a * (n - 1) + b - (b > a ? 1 : 0); }

  private:
    int sig_base() const { return y_column(flows(), 0, 0) + pair_count(tasks()) * machines(); }
};

struct Assignment {
    std::vector<Time> values;  // one per registered column
};

namespace detail {

// Accumulates coefficients per column so repeated touches merge and zeros
// vanish before the row is stored.
class RowBuilder {
  public:
    RowBuilder(std::vector<IlpRow>& rows, std::string id, char sense, double rhs) : rows_(rows) {
        row_.id = std::move(id);
        row_.sense = sense;
        row_.rhs = rhs;
    }

    void add(int column, double coefficient) { acc_[column] += coefficient; }

    void commit() {
        for (const auto& [column, coefficient] : acc_)
            if (coefficient != 0.0) row_.terms.emplace_back(column, coefficient);
        rows_.push_back(std::move(row_));
    }

  private:
    std::vector<IlpRow>& rows_;
    IlpRow row_;
    std::map<int, double> acc_;
};

inline std::string pair_id(const std::string& stem, int a, int b) {
    return stem + "_" + std::to_string(a) + "_" + std::to_string(b);
}

}  // namespace detail

// Builds the full linearization: one start slot per task and per general
// flow, co-location and precedence indicators, big-M separation on shared
// machines and channels, the virtual-channel causality tie, producer/consumer
// timing for every flow, and three makespan families. horizon doubles as the
// big-M constant.
inline IlpModel build_p2(const Instance& inst, Time t_max, double epsilon = 0.5) {
    const ValidationReport graph_report = validate(inst.graph);
    if (!graph_report.ok) throw ValidationFailedError("build_p2: invalid graph: " + graph_report.message());
    if (!(epsilon > 0.0) || !(epsilon < 1.0))
        throw InvalidParamsError("build_p2: epsilon must lie strictly between 0 and 1");
    if (t_max < critical_path_bound(inst.graph))
        throw HorizonTooSmallError("build_p2: horizon " + std::to_string(t_max) +
                                   " is below the critical-path bound " +
                                   std::to_string(critical_path_bound(inst.graph)));

    IlpModel model;
    model.instance = inst;
    model.horizon = t_max;
    model.epsilon = epsilon;

    const JobGraph& g = model.instance.graph;
    const int n = g.task_count(), f_count = g.edge_count();
    const int m_count = inst.machines, c_count = inst.channels;
    const Time T = t_max;
    const double big_m = static_cast<double>(T);

    for (int j = 0; j < n; ++j)
        for (int i = 1; i <= m_count; ++i)
            for (Time t = 0; t < T; ++t)
                model.columns.push_back("X_" + std::to_string(j) + "_" + std::to_string(i) + "_" + std::to_string(t));
    for (int f = 0; f < f_count; ++f)
        for (int c = 0; c <= c_count; ++c)
            for (Time t = 0; t < T; ++t)
                model.columns.push_back("Y_" + std::to_string(f) + "_" + std::to_string(c) + "_" + std::to_string(t));
    for (int j = 0; j < n; ++j)
        for (int jp = j + 1; jp < n; ++jp)
            for (int i = 1; i <= m_count; ++i)
                model.columns.push_back("PSI_" + std::to_string(j) + "_" + std::to_string(jp) + "_" +
                                        std::to_string(i));
    for (int j = 0; j < n; ++j)
        for (int jp = 0; jp < n; ++jp)
            if (j != jp) model.columns.push_back(detail::pair_id("SIG", j, jp));
    for (int f = 0; f < f_count; ++f)
        for (int fp = f + 1; fp < f_count; ++fp)
            for (int k = 1; k <= c_count; ++k)
                model.columns.push_back("CHI_" + std::to_string(f) + "_" + std::to_string(fp) + "_" +
                                        std::to_string(k));
    for (int f = 0; f < f_count; ++f)
        for (int fp = 0; fp < f_count; ++fp)
            if (f != fp) model.columns.push_back(detail::pair_id("PHI", f, fp));
    model.columns.push_back("CMAX");
    model.binary.assign(model.columns.size(), true);
    model.binary.back() = false;

    const int cmax = model.cmax_column();
    auto task_start = [&](detail::RowBuilder& row, int j, double scale) {
        for (int i = 1; i <= m_count; ++i)
            for (Time t = 1; t < T; ++t) row.add(model.x_column(j, i, t), scale * static_cast<double>(t));
    };
    auto flow_start = [&](detail::RowBuilder& row, int f, double scale) {
        for (int c = 0; c <= c_count; ++c)
            for (Time t = 1; t < T; ++t) row.add(model.y_column(f, c, t), scale * static_cast<double>(t));
    };
    auto virtual_sum = [&](detail::RowBuilder& row, int f, double scale) {
        for (Time t = 0; t < T; ++t) row.add(model.y_column(f, 0, t), scale);
    };

    for (int j = 0; j < n; ++j) {  // every task starts exactly once
        detail::RowBuilder row(model.rows, "task_once_" + std::to_string(j), '=', 1.0);
        for (int i = 1; i <= m_count; ++i)
            for (Time t = 0; t < T; ++t) row.add(model.x_column(j, i, t), 1.0);
        row.commit();
    }
    for (int f = 0; f < f_count; ++f) {  // every flow is transferred exactly once
        detail::RowBuilder row(model.rows, "flow_once_" + std::to_string(f), '=', 1.0);
        for (int c = 0; c <= c_count; ++c)
            for (Time t = 0; t < T; ++t) row.add(model.y_column(f, c, t), 1.0);
        row.commit();
    }
    for (int j = 0; j < n; ++j)  // PSI = 1 exactly when both tasks sit on machine i
        for (int jp = j + 1; jp < n; ++jp)
            for (int i = 1; i <= m_count; ++i) {
                const std::string stem = detail::pair_id("coloc", j, jp) + "_" + std::to_string(i);
                detail::RowBuilder lo(model.rows, stem + "_lo", '>', 0.0);
                detail::RowBuilder hi(model.rows, stem + "_hi", '<', 1.0);
                for (Time t = 0; t < T; ++t) {
                    lo.add(model.x_column(j, i, t), 1.0);
                    lo.add(model.x_column(jp, i, t), 1.0);
                    hi.add(model.x_column(j, i, t), 1.0);
                    hi.add(model.x_column(jp, i, t), 1.0);
                }
                lo.add(model.psi_column(j, jp, i), -2.0);
                hi.add(model.psi_column(j, jp, i), -2.0);
                lo.commit();
                hi.commit();
            }
    for (int j = 0; j < n; ++j)  // SIG = 0 forces a strictly earlier start for jp
        for (int jp = 0; jp < n; ++jp) {
            if (j == jp) continue;
            detail::RowBuilder row(model.rows, detail::pair_id("task_ord", j, jp), '<', -epsilon);
            task_start(row, jp, 1.0);
            task_start(row, j, -1.0);
            row.add(model.sig_column(j, jp), -(big_m + epsilon));
            row.commit();
        }
    for (int j = 0; j < n; ++j)  // earlier task on the shared machine finishes first
        for (int jp = 0; jp < n; ++jp) {
            if (j == jp) continue;
            detail::RowBuilder row(model.rows, detail::pair_id("mach_sep", j, jp), '<',
                                   2.0 * big_m - static_cast<double>(g.processing[j]));
            task_start(row, j, 1.0);
            task_start(row, jp, -1.0);
            row.add(model.sig_column(j, jp), big_m);
            for (int i = 1; i <= m_count; ++i) row.add(model.psi_column(j, jp, i), big_m);
            row.commit();
        }
    for (int f = 0; f < f_count; ++f)  // CHI = 1 exactly when both flows share channel k
        for (int fp = f + 1; fp < f_count; ++fp)
            for (int k = 1; k <= c_count; ++k) {
                const std::string stem = detail::pair_id("chan_link", f, fp) + "_" + std::to_string(k);
                detail::RowBuilder lo(model.rows, stem + "_lo", '>', 0.0);
                detail::RowBuilder hi(model.rows, stem + "_hi", '<', 1.0);
                for (Time t = 0; t < T; ++t) {
                    lo.add(model.y_column(f, k, t), 1.0);
                    lo.add(model.y_column(fp, k, t), 1.0);
                    hi.add(model.y_column(f, k, t), 1.0);
                    hi.add(model.y_column(fp, k, t), 1.0);
                }
                lo.add(model.chi_column(f, fp, k), -2.0);
                hi.add(model.chi_column(f, fp, k), -2.0);
                lo.commit();
                hi.commit();
            }
    for (int f = 0; f < f_count; ++f)  // PHI mirrors SIG for flows
        for (int fp = 0; fp < f_count; ++fp) {
            if (f == fp) continue;
            detail::RowBuilder row(model.rows, detail::pair_id("flow_ord", f, fp), '<', -epsilon);
            flow_start(row, fp, 1.0);
            flow_start(row, f, -1.0);
            row.add(model.phi_column(f, fp), -(big_m + epsilon));
            row.commit();
        }
    for (int f = 0; f < f_count; ++f)  // earlier flow on the shared channel delivers first
        for (int fp = 0; fp < f_count; ++fp) {
            if (f == fp) continue;
            detail::RowBuilder row(model.rows, detail::pair_id("chan_sep", f, fp), '<',
                                   2.0 * big_m - static_cast<double>(g.edges[f].q));
            flow_start(row, f, 1.0);
            flow_start(row, fp, -1.0);
            row.add(model.phi_column(f, fp), big_m);
            for (int k = 1; k <= c_count; ++k) row.add(model.chi_column(f, fp, k), big_m);
            row.commit();
        }
    for (int f = 0; f < f_count; ++f) {  // virtual transfer exactly when endpoints share a machine
        detail::RowBuilder row(model.rows, "caus_" + std::to_string(f), '=', 0.0);
        for (int i = 1; i <= m_count; ++i) row.add(model.psi_column(g.edges[f].u, g.edges[f].v, i), 1.0);
        virtual_sum(row, f, -1.0);
        row.commit();
    }
    for (int f = 0; f < f_count; ++f) {  // flow starts after its producer completes
        detail::RowBuilder row(model.rows, "flow_rel_" + std::to_string(f), '<',
                               -static_cast<double>(g.processing[g.edges[f].u]));
        task_start(row, g.edges[f].u, 1.0);
        flow_start(row, f, -1.0);
        row.commit();
    }
    for (int f = 0; f < f_count; ++f) {  // consumer waits r (virtual) or q (external) slots
        const Edge& e = g.edges[f];
        detail::RowBuilder row(model.rows, "cons_rel_" + std::to_string(f), '<', -static_cast<double>(e.q));
        flow_start(row, f, 1.0);
        task_start(row, e.v, -1.0);
        virtual_sum(row, f, static_cast<double>(e.r - e.q));
        row.commit();
    }
    for (int j = 0; j < n; ++j) {
        detail::RowBuilder row(model.rows, "mk_task_" + std::to_string(j), '<',
                               -static_cast<double>(g.processing[j]));
        task_start(row, j, 1.0);
        row.add(cmax, -1.0);
        row.commit();
    }
    for (int f = 0; f < f_count; ++f) {
        detail::RowBuilder row(model.rows, "mk_flow_ext_" + std::to_string(f), '<',
                               -static_cast<double>(g.edges[f].q));
        flow_start(row, f, 1.0);
        virtual_sum(row, f, -static_cast<double>(g.edges[f].q));
        row.add(cmax, -1.0);
        row.commit();
    }
    for (int f = 0; f < f_count; ++f) {
        detail::RowBuilder row(model.rows, "mk_flow_int_" + std::to_string(f), '<', 0.0);
        flow_start(row, f, 1.0);
        virtual_sum(row, f, static_cast<double>(g.edges[f].r));
        row.add(cmax, -1.0);
        row.commit();
    }
    return model;
}

namespace detail {

inline std::string lp_number(double value) {
    if (value == std::floor(value) && std::abs(value) < 1e15)
        return std::to_string(static_cast<long long>(value));
    std::ostringstream out;
    out << value;
    return out.str();
}

}  // namespace detail

// Deterministic LP text: header comments (instance hash, horizon, epsilon,
// time base), objective, rows in construction order, CMAX bounds, integer and
// binary declarations.
inline void export_lp(const IlpModel& model, std::ostream& out) {
    out << "\\ makespan model for instance " << instance_hash_hex(model.instance) << "\n";
    out << "\\ horizon t_max = " << model.horizon << " (time slots are 0-based: t in 0.." << model.horizon - 1
        << "), big-M = t_max, epsilon = " << detail::lp_number(model.epsilon) << "\n";
    out << "Minimize\n obj: CMAX\n";
    out << "Subject To\n";
    for (const IlpRow& row : model.rows) {
        out << " " << row.id << ":";
        for (const auto& [column, coefficient] : row.terms) {
            out << (coefficient < 0 ? " -" : " +");
            if (std::abs(coefficient) != 1.0) out << " " << detail::lp_number(std::abs(coefficient));
            out << " " << model.columns[column];
        }
        const char* sense = row.sense == '=' ? "=" : (row.sense == '<' ? "<=" : ">=");
        out << " " << sense << " " << detail::lp_number(row.rhs) << "\n";
    }
    out << "Bounds\n 0 <= CMAX <= " << model.horizon << "\n";
    out << "Generals\n CMAX\n";
    out << "Binaries\n";
    int on_line = 0;
    for (size_t c = 0; c < model.columns.size(); ++c) {
        if (!model.binary[c]) continue;
        out << " " << model.columns[c];
        if (++on_line == 8) {
            out << "\n";
            on_line = 0;
        }
    }
    if (on_line != 0) out << "\n";
    out << "End\n";
    if (!out) throw SinkFailureError("export_lp: stream write failed");
}

inline void export_lp(const IlpModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SinkFailureError("export_lp: cannot open " + path);
    export_lp(model, out);
}

namespace detail {

inline void require_assignment_shape(const IlpModel& model, const Assignment& a) {
    if (a.values.size() != model.columns.size())
        throw ShapeMismatchError("assignment covers " + std::to_string(a.values.size()) + " columns, model has " +
                                 std::to_string(model.columns.size()));
}

}  // namespace detail

// Exact row-by-row evaluation; returns the ids of violated rows, plus
// domain_<name> entries for out-of-range variable values.
inline std::vector<std::string> validate_assignment(const IlpModel& model, const Assignment& a) {
    detail::require_assignment_shape(model, a);
    std::vector<std::string> violated;
    for (size_t c = 0; c < model.columns.size(); ++c) {
        const Time v = a.values[c];
        const bool ok = model.binary[c] ? (v == 0 || v == 1) : (v >= 0 && v <= model.horizon);
        if (!ok) violated.push_back("domain_" + model.columns[c]);
    }
    for (const IlpRow& row : model.rows) {
        double lhs = 0.0;
        for (const auto& [column, coefficient] : row.terms)
            lhs += coefficient * static_cast<double>(a.values[column]);
        const double slack = 1e-6;
        const bool ok = row.sense == '=' ? std::abs(lhs - row.rhs) <= slack
                        : row.sense == '<' ? lhs <= row.rhs + slack
                                           : lhs >= row.rhs - slack;
        if (!ok) violated.push_back(row.id);
    }
    return violated;
}

// Reads the one set X/Y slot per activity back into a Schedule.
inline Schedule decode_solution(const IlpModel& model, const Assignment& a) {
    detail::require_assignment_shape(model, a);
    Schedule s;
    s.tasks.resize(model.tasks());
    s.flows.resize(model.flows());
    for (int j = 0; j < model.tasks(); ++j) {
        int hits = 0;
        for (int i = 1; i <= model.machines(); ++i)
            for (Time t = 0; t < model.horizon; ++t)
                if (a.values[model.x_column(j, i, t)] != 0) {
                    ++hits;
                    s.tasks[j] = {i, t};
                }
        if (hits != 1)
            throw MultipleStartsError("task " + std::to_string(j) + " has " + std::to_string(hits) + " starts");
    }
    for (int f = 0; f < model.flows(); ++f) {
        int hits = 0;
        for (int c = 0; c <= model.channels(); ++c)
            for (Time t = 0; t < model.horizon; ++t)
                if (a.values[model.y_column(f, c, t)] != 0) {
                    ++hits;
                    s.flows[f] = {c, t};
                }
        if (hits != 1)
            throw MultipleStartsError("flow " + std::to_string(f) + " has " + std::to_string(hits) + " starts");
    }
    s.makespan = makespan(model.instance, s);
    return s;
}

// Canonical assignment for a schedule: indicator variables are completed the
// way their definitions read (SIG/PHI = starts-no-later, ties set both
// directions; PSI/CHI = shared resource; CMAX = makespan).
inline Assignment encode_schedule(const IlpModel& model, const Schedule& s) {
    detail::require_shape(model.instance, s);
    Assignment a;
    a.values.assign(model.columns.size(), 0);
    const JobGraph& g = model.instance.graph;
    for (int j = 0; j < model.tasks(); ++j) {
        const auto& [machine, start] = s.tasks[j];
        if (machine < 1 || machine > model.machines())
            throw ValidationFailedError("task " + std::to_string(j) + " sits on unknown machine " +
                                        std::to_string(machine));
        if (start < 0 || start >= model.horizon)
            throw HorizonTooSmallError("task " + std::to_string(j) + " starts outside the time grid");
        a.values[model.x_column(j, machine, start)] = 1;
    }
    for (int f = 0; f < model.flows(); ++f) {
        const auto& [channel, start] = s.flows[f];
        if (channel < 0 || channel > model.channels())
            throw ValidationFailedError("flow " + std::to_string(f) + " sits on unknown channel " +
                                        std::to_string(channel));
        if (start < 0 || start >= model.horizon)
            throw HorizonTooSmallError("flow " + std::to_string(f) + " starts outside the time grid");
        a.values[model.y_column(f, channel, start)] = 1;
    }
    for (int j = 0; j < model.tasks(); ++j)
        for (int jp = j + 1; jp < model.tasks(); ++jp)
            if (s.tasks[j].machine == s.tasks[jp].machine)
                a.values[model.psi_column(j, jp, s.tasks[j].machine)] = 1;
    for (int j = 0; j < model.tasks(); ++j)
        for (int jp = 0; jp < model.tasks(); ++jp)
            if (j != jp && s.tasks[j].start <= s.tasks[jp].start) a.values[model.sig_column(j, jp)] = 1;
    for (int f = 0; f < model.flows(); ++f)
        for (int fp = f + 1; fp < model.flows(); ++fp)
            if (!s.flows[f].is_virtual() && s.flows[f].channel == s.flows[fp].channel)
                a.values[model.chi_column(f, fp, s.flows[f].channel)] = 1;
    for (int f = 0; f < model.flows(); ++f)
        for (int fp = 0; fp < model.flows(); ++fp)
            if (f != fp && s.flows[f].start <= s.flows[fp].start) a.values[model.phi_column(f, fp)] = 1;
    Time end = 0;
    for (int j = 0; j < model.tasks(); ++j) end = std::max(end, s.tasks[j].start + g.processing[j]);
    for (int f = 0; f < model.flows(); ++f)
        end = std::max(end, s.flows[f].start + flow_duration(g.edges[f], s.flows[f]));
    a.values[model.cmax_column()] = end;
    return a;
}

// Row tallies per family, in construction order. Families with no instances
// still appear with a zero count.
inline std::vector<std::pair<std::string, std::int64_t>> constraint_counts(const IlpModel& model) {
    const char* families[] = {"task_once", "flow_once", "coloc",    "task_ord",    "mach_sep",
                              "chan_link", "flow_ord",  "chan_sep", "caus",        "flow_rel",
                              "cons_rel",  "mk_task",   "mk_flow_ext", "mk_flow_int"};
    std::vector<std::pair<std::string, std::int64_t>> counts;
    for (const char* family : families) counts.emplace_back(family, 0);
    for (const IlpRow& row : model.rows)
        for (auto& [family, count] : counts)
            if (row.id.rfind(family + std::string("_"), 0) == 0) {
                ++count;
                break;
            }
    return counts;
}

}  // namespace dagsched
