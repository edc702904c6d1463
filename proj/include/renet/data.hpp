#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "renet/common.hpp"

namespace renet::data {

/// One time-stamped directed labeled edge (s, r, o, t). Timestamps are
/// discrete integers remapped to 0..T-1 at ingest.
struct Event {
    int s = 0;
    int r = 0;
    int o = 0;
    int t = 0;

    friend bool operator==(const Event&, const Event&) = default;
    friend auto operator<=>(const Event&, const Event&) = default;
};

/// Tag for the no-leakage audit: where a slice handed to the encoder came
/// from. Split tags are assigned by split_by_time.
enum class SliceOrigin { unsplit, train, valid, test, generated };

/// All events sharing one timestamp, with inverted neighbor indexes.
class GraphSlice {
public:
    GraphSlice() = default;
    GraphSlice(int t, std::vector<Event> events, SliceOrigin origin = SliceOrigin::unsplit);

    int t() const { return t_; }
    SliceOrigin origin() const { return origin_; }
    void set_origin(SliceOrigin o) { origin_ = o; }
    const std::vector<Event>& events() const { return events_; }
    bool empty() const { return events_.empty(); }

    /// Subjects with at least one outgoing event in this slice, ascending.
    const std::vector<int>& active_subjects() const { return subjects_; }
    /// Relations under which s acts in this slice, ascending; empty if inactive.
    std::vector<int> relations_of(int s) const;
    /// N_t^(s,r): objects of events (s,r,.,t), in event order.
    const std::vector<int>& neighbors(int s, int r) const;
    /// All (s,r) pairs active in this slice, ascending.
    const std::vector<std::pair<int, int>>& active_pairs() const { return pairs_; }
    /// Every entity appearing as subject or object, ascending.
    const std::vector<int>& nodes() const { return nodes_; }

private:
    int t_ = 0;
    SliceOrigin origin_ = SliceOrigin::unsplit;
    std::vector<Event> events_;
    std::vector<int> subjects_;
    std::vector<int> nodes_;
    std::vector<std::pair<int, int>> pairs_;
    std::map<std::pair<int, int>, std::vector<int>> index_sr_;
};

struct SplitBounds {
    // Slice index ranges: train [0, train_end), valid [train_end, valid_end),
    // test [valid_end, size).
    int train_end = 0;
    int valid_end = 0;
};

struct Vocab {
    std::vector<std::string> names;            // id -> label, first-seen order
    std::map<std::string, int> ids;            // label -> id

    int intern(const std::string& label);
    std::optional<int> lookup(const std::string& label) const;
    bool empty() const { return names.empty(); }
};

/// Ordered slice sequence plus vocabulary and split metadata. Immutable
/// after construction apart from explicit pipeline steps (split, inverse
/// augmentation).
struct Dataset {
    std::vector<GraphSlice> slices;            // strictly increasing t = 0..T-1
    int num_entities = 0;
    int num_relations = 0;                     // doubled after inverse augmentation
    int num_base_relations = 0;
    bool inverse_augmented = false;
    std::vector<long long> raw_times;          // normalized t -> original timestamp
    Vocab entity_vocab;                        // populated in labeled mode
    Vocab relation_vocab;
    std::optional<SplitBounds> splits;

    long long num_events() const;
    int num_timestamps() const { return static_cast<int>(slices.size()); }

    std::vector<const GraphSlice*> train_slices() const;
    std::vector<const GraphSlice*> valid_slices() const;
    std::vector<const GraphSlice*> test_slices() const;
    std::vector<const GraphSlice*> split_slices(SliceOrigin which) const;
};

enum class QuadFormat { ids, labeled };

/// Parses tab-separated quadruples "s\tr\to\tt". Labeled mode interns
/// strings in first-seen order; id mode takes non-negative integers.
Dataset parse_quadruples(std::istream& in, QuadFormat format,
                         const std::string& source_name = "<stream>");
Dataset parse_quadruples_file(const std::string& path, QuadFormat format);

/// Rebuilds a dataset from raw events (timestamps arbitrary non-negative
/// integers; remapped to consecutive 0..T-1 preserving order).
Dataset dataset_from_events(std::vector<Event> events, int num_entities = 0,
                            int num_relations = 0);

void write_quadruples(std::ostream& out, const Dataset& ds);

struct SpanFact {
    int s = 0;
    int r = 0;
    int o = 0;
    long long t_start = 0;
    long long t_end = 0;  // inclusive
};

std::vector<SpanFact> parse_span_facts(std::istream& in, const std::string& source_name);

/// Expands span facts into one event per unit step, dropping events before
/// the cutoff.
std::vector<Event> expand_time_spans(const std::vector<SpanFact>& facts, long long unit,
                                     long long cutoff);

/// Chooses split boundaries on timestamp borders minimizing
/// |cum(train)-f1| + |cum(train+valid)-(f1+f2)| over event-count fractions.
/// Each split receives at least one timestamp; ties resolve to the earliest
/// boundaries. Tags slice origins.
void split_by_time(Dataset& ds, double train_frac = 0.8, double valid_frac = 0.1);

/// Adds (o, r + R_base, s, t) for every event. Errors if already augmented.
void add_inverse_relations(Dataset& ds);

/// The latest <= m slice indices at times < t in which s appears as a
/// subject, ascending; scans back to the beginning of the data.
std::vector<int> history_window(const Dataset& ds, int s, int t, int m);

// ---------------------------------------------------------------------------
// Synthetic generator

/// Fact emitted every `period` steps at a fixed phase.
struct PeriodicMotif {
    int s = 0, r = 0, o = 0;
    int period = 1;
    int phase = 0;
};

/// Chain pattern "r1 at t implies r2 at t+1" over auto-assigned subjects and
/// per-subject object pools.
///
/// Modes:
///   cycle - the trigger object advances cyclically through the pool each
///           firing; triggers fire with probability `rate` per step.
///   relay - the trigger re-announces a fresh random pool object with
///           probability `rate`; the effect repeats the announced object
///           every step until the next announcement.
/// `clutter_rate` adds co-occurring distractor events under r2 (objects from
/// a dedicated clutter pool) alongside each effect.
struct ChainMotif {
    enum class Mode { cycle, relay };
    int r1 = 0;
    int r2 = 1;
    Mode mode = Mode::cycle;
    int instances = 1;
    int pool = 3;             // objects per chain instance
    double rate = 1.0;        // trigger probability per step
    double clutter_rate = 0.0;
    int clutter_pool = 0;     // distractor objects per instance (0 disables)
};

struct SyntheticSpec {
    std::uint64_t seed = 0;
    int num_entities = 0;
    int num_relations = 0;
    int num_slices = 0;
    double noise_rate = 0.0;        // target fraction of noise events
    int noise_subject_pool = 0;     // 0 = all entities
    int noise_object_pool = 0;      // 0 = all entities
    std::vector<PeriodicMotif> periodic;
    std::vector<ChainMotif> chains;
};

struct SyntheticStats {
    long long motif_events = 0;
    long long noise_events = 0;
};

SyntheticSpec parse_synthetic_spec(std::istream& in, const std::string& source_name);
SyntheticSpec parse_synthetic_spec_file(const std::string& path);

/// Deterministic given spec.seed. The generated timeline covers all
/// num_slices timestamps, including those past any later train split.
Dataset generate_synthetic(const SyntheticSpec& spec, SyntheticStats* stats = nullptr);

// ---------------------------------------------------------------------------
// Dataset archive (directory with events.tsv, meta.json, optional vocab TSVs)

void save_dataset(const Dataset& ds, const std::string& dir);
Dataset load_dataset(const std::string& dir);

}  // namespace renet::data
