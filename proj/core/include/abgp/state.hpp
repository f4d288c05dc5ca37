#pragma once

#include "abgp/records.hpp"

#include <functional>
#include <map>
#include <unordered_map>
#include <unordered_set>

namespace abgp::state {

enum class AppendKind {
    StoredNew,
    SignaturesMerged,
    PromotedToMultisig,
    ReplacedByMultisig,
    KeptHigherMultisig,
    Ignored,
};

enum class IgnoreReason {
    None,
    // validation failures, 1:1 with records::ValidationReason
    BadHash,
    UnknownSigner,
    BadPartialSignature,
    SharedKeyMismatch,
    BadMultisig,
    BadSignatureCount,
    // protocol-level
    StaleIntermediate,  // local record is already multisig
    DuplicateMultisig,  // incoming multisig equals the stored one
};

const char* append_kind_name(AppendKind kind) noexcept;
const char* ignore_reason_name(IgnoreReason reason) noexcept;

struct AppendOutcome {
    AppendKind kind = AppendKind::Ignored;
    std::size_t merged_signatures = 0;            // SignaturesMerged
    bool adopted_incoming = false;                // KeptHigherMultisig: incoming won
    IgnoreReason reason = IgnoreReason::None;     // Ignored

    bool mutated() const noexcept {
        return kind != AppendKind::Ignored &&
               !(kind == AppendKind::SignaturesMerged && merged_signatures == 0) &&
               !(kind == AppendKind::KeptHigherMultisig && !adopted_incoming);
    }
};

/// Aggregates all partial signatures present on an intermediate record into a
/// multisig record over the same signer set. Requires at least quorum
/// signatures; throws Error{QuorumNotReached} otherwise.
records::RecordModel promote_to_multisig(const records::RecordModel& record,
                                         const records::ClusterSpec& cluster);

using ClockFn = std::function<std::int64_t()>;

struct StoreOptions {
    /// Pins timestampIndex to 0 for deployments whose clock discipline
    /// guarantees unique millisecond stamps. A collision under this flag
    /// bumps the timestamp by one millisecond instead of using the index.
    bool reduced_timestamp_index = false;
};

/// Per-node record store. Single-writer: callers serialize mutations; the
/// read-only queries may run concurrently with each other.
class StateStore {
public:
    StateStore(records::ClusterSpec cluster, crypto::KeyPair keys, ClockFn clock,
               StoreOptions options = {});

    /// Builds, signs and stores a new intermediate record.
    /// Throws Error{DuplicateRecord} when the hash is already stored.
    const records::RecordModel& append_local(std::string_view key, std::string_view value,
                                             std::uint64_t version);

    /// Applies one untrusted replicated record. Never throws on hostile input.
    AppendOutcome append_remote(const records::RecordModel& incoming);

    /// Folds one newly confirmed hash into the running root and stamps the
    /// record with the resulting stateHash. The record must already be stored
    /// as multisig; double-counting throws Error{InternalError}.
    crypto::Scalar update_root(const records::Digest& confirmed_hash);

    /// Running root: sum mod n of all confirmed record hashes (0 when none).
    crypto::Scalar current_root() const noexcept { return root_; }

    /// Recomputes the root from scratch, re-validates every stored record and
    /// cross-checks the most recent confirmed record's stateHash. False means
    /// the store is corrupt.
    bool replay_validate() const;

    /// Records strictly after (ts, idx) in replication order, ascending,
    /// at most `limit` entries.
    std::vector<records::RecordModel> records_after(std::int64_t ts, std::uint64_t idx,
                                                    std::size_t limit) const;

    const records::RecordModel* find(const records::Digest& hash) const noexcept;
    std::size_t record_count() const noexcept { return records_.size(); }
    std::size_t confirmed_count() const noexcept { return confirmed_.size(); }
    std::vector<records::Digest> confirmed_hashes() const;

    const records::ClusterSpec& cluster() const noexcept { return cluster_; }
    const crypto::KeyPair& keys() const noexcept { return keys_; }

    /// Invoked after every stored-record mutation with the final record
    /// state; the journal hangs off this.
    using MutationHook = std::function<void(const records::RecordModel&)>;
    void set_mutation_hook(MutationHook hook) { hook_ = std::move(hook); }

    /// Trusted boot path: inserts a record preserving its stamps, stateHash
    /// and root contribution. Callers must run replay_validate afterwards.
    void restore_record(records::RecordModel record);

private:
    struct Stamp {
        std::int64_t ts;
        std::uint64_t idx;
    };

    Stamp allocate_stamp();
    void index_insert(const records::RecordModel& record);
    void index_erase(const records::RecordModel& record);
    void notify(const records::RecordModel& record);

    records::ClusterSpec cluster_;
    crypto::KeyPair keys_;
    ClockFn clock_;
    StoreOptions options_;
    std::unordered_map<records::Digest, records::RecordModel, records::DigestHash> records_;
    std::map<records::OrderKey, records::Digest> order_;
    std::unordered_set<records::Digest, records::DigestHash> confirmed_;
    crypto::Scalar root_;
    std::int64_t last_ts_ = 0;
    std::uint64_t last_idx_ = 0;
    bool any_stamp_ = false;
    MutationHook hook_;
};

}  // namespace abgp::state
