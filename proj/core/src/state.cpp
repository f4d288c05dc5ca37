#include "abgp/state.hpp"

#include "abgp/errors.hpp"

#include <algorithm>

namespace abgp::state {

namespace {

IgnoreReason from_validation(records::ValidationReason reason) noexcept {
    using VR = records::ValidationReason;
    switch (reason) {
        case VR::Ok: return IgnoreReason::None;
        case VR::BadHash: return IgnoreReason::BadHash;
        case VR::UnknownSigner: return IgnoreReason::UnknownSigner;
        case VR::BadPartialSignature: return IgnoreReason::BadPartialSignature;
        case VR::SharedKeyMismatch: return IgnoreReason::SharedKeyMismatch;
        case VR::BadMultisig: return IgnoreReason::BadMultisig;
        case VR::BadSignatureCount: return IgnoreReason::BadSignatureCount;
    }
    return IgnoreReason::None;
}

std::vector<crypto::CurvePoint> signer_keys(const records::RecordModel& record) {
    std::vector<crypto::CurvePoint> keys;
    keys.reserve(record.signatures.size());
    for (const auto& [pk, sig] : record.signatures) keys.push_back(pk);
    return keys;  // std::map iterates in ascending key order
}

}  // namespace

const char* append_kind_name(AppendKind kind) noexcept {
    switch (kind) {
        case AppendKind::StoredNew: return "StoredNew";
        case AppendKind::SignaturesMerged: return "SignaturesMerged";
        case AppendKind::PromotedToMultisig: return "PromotedToMultisig";
        case AppendKind::ReplacedByMultisig: return "ReplacedByMultisig";
        case AppendKind::KeptHigherMultisig: return "KeptHigherMultisig";
        case AppendKind::Ignored: return "Ignored";
    }
    return "?";
}

const char* ignore_reason_name(IgnoreReason reason) noexcept {
    switch (reason) {
        case IgnoreReason::None: return "None";
        case IgnoreReason::BadHash: return "BadHash";
        case IgnoreReason::UnknownSigner: return "UnknownSigner";
        case IgnoreReason::BadPartialSignature: return "BadPartialSignature";
        case IgnoreReason::SharedKeyMismatch: return "SharedKeyMismatch";
        case IgnoreReason::BadMultisig: return "BadMultisig";
        case IgnoreReason::BadSignatureCount: return "BadSignatureCount";
        case IgnoreReason::StaleIntermediate: return "StaleIntermediate";
        case IgnoreReason::DuplicateMultisig: return "DuplicateMultisig";
    }
    return "?";
}

records::RecordModel promote_to_multisig(const records::RecordModel& record,
                                         const records::ClusterSpec& cluster) {
    if (record.signature_type != records::SignatureType::Intermediate) {
        throw Error(Errc::InternalError, "only intermediate records can be promoted");
    }
    if (record.signatures.size() < cluster.quorum()) {
        throw Error(Errc::QuorumNotReached, "fewer signatures than quorum");
    }
    const crypto::Scalar hash_scalar = crypto::hash_to_scalar(record.hash);

    // fold every signature present, not a quorum subset; competing aggregates
    // across nodes reconcile through the highest-multisig rule
    std::vector<crypto::Scalar> partials;
    partials.reserve(record.signatures.size());
    for (const auto& [pk, sig] : record.signatures) partials.push_back(sig);
    const crypto::Scalar aggregate = crypto::aggregate_partials(partials);

    std::vector<crypto::CurvePoint> signers = signer_keys(record);
    const crypto::CurvePoint shared = crypto::build_shared_public_key(signers, hash_scalar);

    records::RecordModel out = record;
    out.signature_type = records::SignatureType::Multisig;
    out.signatures.clear();
    out.signatures.emplace(shared, aggregate);
    out.public_keys = std::move(signers);
    out.state_hash.reset();
    return out;
}

StateStore::StateStore(records::ClusterSpec cluster, crypto::KeyPair keys, ClockFn clock,
                       StoreOptions options)
    : cluster_(std::move(cluster)),
      keys_(std::move(keys)),
      clock_(std::move(clock)),
      options_(options) {}

StateStore::Stamp StateStore::allocate_stamp() {
    std::int64_t now = clock_();
    if (any_stamp_ && now <= last_ts_) {
        if (options_.reduced_timestamp_index) {
            // the caller promised unique millisecond stamps; keep that shape
            ++last_ts_;
            last_idx_ = 0;
        } else {
            // same millisecond (or a clock step back): disambiguate by index
            ++last_idx_;
        }
    } else {
        last_ts_ = now;
        last_idx_ = 0;
        any_stamp_ = true;
    }
    return Stamp{last_ts_, last_idx_};
}

void StateStore::index_insert(const records::RecordModel& record) {
    order_.emplace(records::order_key(record), record.hash);
}

void StateStore::index_erase(const records::RecordModel& record) {
    order_.erase(records::order_key(record));
}

void StateStore::notify(const records::RecordModel& record) {
    if (hook_) hook_(record);
}

const records::RecordModel& StateStore::append_local(std::string_view key, std::string_view value,
                                                     std::uint64_t version) {
    const records::Digest hash = records::compute_record_hash(key, value, version);
    if (records_.contains(hash)) {
        throw Error(Errc::DuplicateRecord, "record already stored: " + records::digest_to_hex(hash));
    }

    records::RecordModel rec;
    rec.hash = hash;
    rec.key = std::string(key);
    rec.value = std::string(value);
    rec.version = version;
    rec.signature_type = records::SignatureType::Intermediate;
    const crypto::Scalar hash_scalar = crypto::hash_to_scalar(hash);
    rec.signatures.emplace(keys_.public_key, crypto::partial_sign(keys_.private_key, hash_scalar));
    rec.public_keys = {keys_.public_key};

    const Stamp stamp = allocate_stamp();
    rec.timestamp = stamp.ts;
    rec.timestamp_index = stamp.idx;
    rec.created_at = stamp.ts;

    auto [it, inserted] = records_.emplace(hash, std::move(rec));
    index_insert(it->second);
    notify(it->second);
    return it->second;
}

AppendOutcome StateStore::append_remote(const records::RecordModel& incoming) {
    const auto verdict = records::validate_record(incoming, cluster_);
    if (!verdict.ok()) {
        return AppendOutcome{AppendKind::Ignored, 0, false, from_validation(verdict.reason)};
    }

    auto it = records_.find(incoming.hash);
    if (it == records_.end()) {
        records::RecordModel rec = incoming;
        rec.state_hash.reset();
        const Stamp stamp = allocate_stamp();
        rec.timestamp = stamp.ts;
        rec.timestamp_index = stamp.idx;

        if (rec.signature_type == records::SignatureType::Multisig) {
            const records::Digest hash = rec.hash;
            auto [ins, ok] = records_.emplace(hash, std::move(rec));
            index_insert(ins->second);
            update_root(hash);
            notify(ins->second);
            return AppendOutcome{AppendKind::StoredNew};
        }

        // countersign the unknown record before storing
        const crypto::Scalar hash_scalar = crypto::hash_to_scalar(rec.hash);
        rec.signatures.insert_or_assign(keys_.public_key,
                                        crypto::partial_sign(keys_.private_key, hash_scalar));
        rec.public_keys = signer_keys(rec);

        const bool promote = rec.signatures.size() >= cluster_.quorum();
        if (promote) rec = promote_to_multisig(rec, cluster_);
        const records::Digest hash = rec.hash;
        auto [ins, ok] = records_.emplace(hash, std::move(rec));
        index_insert(ins->second);
        if (promote) update_root(hash);
        notify(ins->second);
        return AppendOutcome{promote ? AppendKind::PromotedToMultisig : AppendKind::StoredNew};
    }

    records::RecordModel& local = it->second;
    const bool local_multisig = local.signature_type == records::SignatureType::Multisig;
    const bool incoming_multisig = incoming.signature_type == records::SignatureType::Multisig;

    if (!local_multisig && incoming_multisig) {
        index_erase(local);
        const std::int64_t created_at = local.created_at;
        local = incoming;
        local.created_at = created_at;
        local.state_hash.reset();
        const Stamp stamp = allocate_stamp();
        local.timestamp = stamp.ts;
        local.timestamp_index = stamp.idx;
        index_insert(local);
        update_root(local.hash);
        notify(local);
        return AppendOutcome{AppendKind::ReplacedByMultisig};
    }

    if (local_multisig && incoming_multisig) {
        const crypto::Scalar& local_sig = local.signatures.begin()->second;
        const crypto::Scalar& incoming_sig = incoming.signatures.begin()->second;
        const auto cmp = crypto::compare_signatures(incoming_sig, local_sig);
        if (cmp == std::strong_ordering::equal) {
            return AppendOutcome{AppendKind::Ignored, 0, false, IgnoreReason::DuplicateMultisig};
        }
        if (cmp == std::strong_ordering::greater) {
            // same hash is already counted in the root; only the signature
            // bundle and the stamp change
            index_erase(local);
            const std::int64_t created_at = local.created_at;
            const auto state_hash = local.state_hash;
            local = incoming;
            local.created_at = created_at;
            local.state_hash = state_hash;
            const Stamp stamp = allocate_stamp();
            local.timestamp = stamp.ts;
            local.timestamp_index = stamp.idx;
            index_insert(local);
            notify(local);
            return AppendOutcome{AppendKind::KeptHigherMultisig, 0, true};
        }
        return AppendOutcome{AppendKind::KeptHigherMultisig, 0, false};
    }

    if (local_multisig && !incoming_multisig) {
        return AppendOutcome{AppendKind::Ignored, 0, false, IgnoreReason::StaleIntermediate};
    }

    // both intermediate: union of signature entries
    std::size_t added = 0;
    for (const auto& [pk, sig] : incoming.signatures) {
        if (local.signatures.emplace(pk, sig).second) ++added;
    }
    if (added == 0) {
        return AppendOutcome{AppendKind::SignaturesMerged, 0};
    }
    local.public_keys = signer_keys(local);

    const bool promote = local.signatures.size() >= cluster_.quorum();
    if (promote) {
        records::RecordModel promoted = promote_to_multisig(local, cluster_);
        index_erase(local);
        promoted.created_at = local.created_at;
        local = std::move(promoted);
    } else {
        index_erase(local);
    }
    const Stamp stamp = allocate_stamp();
    local.timestamp = stamp.ts;
    local.timestamp_index = stamp.idx;
    index_insert(local);
    if (promote) update_root(local.hash);
    notify(local);
    return promote ? AppendOutcome{AppendKind::PromotedToMultisig}
                   : AppendOutcome{AppendKind::SignaturesMerged, added};
}

crypto::Scalar StateStore::update_root(const records::Digest& confirmed_hash) {
    auto it = records_.find(confirmed_hash);
    if (it == records_.end() || it->second.signature_type != records::SignatureType::Multisig) {
        throw Error(Errc::InternalError, "update_root on a hash that is not stored as multisig");
    }
    if (!confirmed_.insert(confirmed_hash).second) {
        throw Error(Errc::InternalError,
                    "hash counted twice in root: " + records::digest_to_hex(confirmed_hash));
    }
    root_ = root_.add(crypto::hash_to_scalar(confirmed_hash));
    it->second.state_hash = root_;
    return root_;
}

bool StateStore::replay_validate() const {
    crypto::Scalar recomputed;
    std::size_t confirmed_seen = 0;
    const records::RecordModel* latest_confirmed = nullptr;
    for (const auto& [key, hash] : order_) {
        auto it = records_.find(hash);
        if (it == records_.end()) return false;
        const auto& rec = it->second;
        if (!records::validate_record(rec, cluster_).ok()) return false;
        if (rec.signature_type == records::SignatureType::Multisig) {
            recomputed = recomputed.add(crypto::hash_to_scalar(rec.hash));
            ++confirmed_seen;
            latest_confirmed = &rec;  // order_ is ascending; last one wins
            if (!confirmed_.contains(rec.hash)) return false;
        }
    }
    if (order_.size() != records_.size()) return false;
    if (confirmed_seen != confirmed_.size()) return false;
    if (!(recomputed == root_)) return false;
    if (latest_confirmed != nullptr) {
        // the most recent confirmed record carries the current root
        if (!latest_confirmed->state_hash || !(*latest_confirmed->state_hash == root_)) return false;
    }
    return true;
}

std::vector<records::RecordModel> StateStore::records_after(std::int64_t ts, std::uint64_t idx,
                                                            std::size_t limit) const {
    std::vector<records::RecordModel> out;
    records::Digest max_digest;
    max_digest.fill(0xFF);
    auto it = order_.upper_bound(records::OrderKey{ts, idx, max_digest});
    for (; it != order_.end() && out.size() < limit; ++it) {
        out.push_back(records_.at(it->second));
    }
    return out;
}

const records::RecordModel* StateStore::find(const records::Digest& hash) const noexcept {
    auto it = records_.find(hash);
    return it == records_.end() ? nullptr : &it->second;
}

std::vector<records::Digest> StateStore::confirmed_hashes() const {
    std::vector<records::Digest> out(confirmed_.begin(), confirmed_.end());
    std::sort(out.begin(), out.end());
    return out;
}

void StateStore::restore_record(records::RecordModel record) {
    const records::Digest hash = record.hash;
    if (records_.contains(hash)) {
        throw Error(Errc::InternalError, "restore_record: hash already present");
    }
    if (record.signature_type == records::SignatureType::Multisig) {
        confirmed_.insert(hash);
        root_ = root_.add(crypto::hash_to_scalar(hash));
    }
    if (!any_stamp_ || record.timestamp > last_ts_ ||
        (record.timestamp == last_ts_ && record.timestamp_index > last_idx_)) {
        last_ts_ = record.timestamp;
        last_idx_ = record.timestamp_index;
        any_stamp_ = true;
    }
    auto [it, inserted] = records_.emplace(hash, std::move(record));
    index_insert(it->second);
}

}  // namespace abgp::state
