"""Deterministic round-based network simulator.

One round models one keyblock interval: traffic is generated, miners race
the puzzle with attempt budgets proportional to their power share, the
consensus group pins the winning keyblock, registers new patients, then
drains and pins a fair batch of medical/label transactions.

Determinism: a single seeded RNG drives every random choice in a fixed
order, and same-round transaction delivery is canonically reordered by
transaction id before queueing, so arrival permutations cannot change the
pinned history.
"""

from __future__ import annotations

import dataclasses
import hashlib
import random
from dataclasses import dataclass, field
from typing import Optional

from .actors import (
    EmrRecord,
    InstitutionActor,
    PatientActor,
    label as make_label,
    register as make_register,
    setup_institution,
    setup_patient,
    upload as make_upload,
)
from .adversaries import Adversary, make_adversary
from .blocks import (
    KeyBlock,
    MicroBlock,
    institution_root,
    keyblock_hash,
    microblock_hash,
    update_institution_root,
)
from .chain import ALREADY_REGISTERED, ChainState
from .consensus import ConsensusGroup, InsufficientQuorum, pin, select_group
from .group import default_group
from .metrics import MetricsRecord
from .mining import ForkChoice, fork_choice, mine_keyblock, target_from_zero_bits
from .reputation import ChunkStats, PinnedShareR1, combine_reputation, compute_r2
from .rewards import FeeSchedule, distribute_rewards
from .scheduler import SchedulerState, schedule_batch
from .signing import sign
from .simconfig import ScenarioConfig
from .tx import Transaction, TxType


class InvariantViolation(Exception):
    """A safety property the simulator must uphold was broken."""


# floor applied to consensus weights so the strict >2/3 weight quorum is
# meaningful before any reputation has accrued (all-zero weights could
# never be exceeded)
WEIGHT_FLOOR = 0.01


@dataclass
class SimulationResult:
    config: ScenarioConfig
    records: list[MetricsRecord]
    reputation_rows: list[tuple[int, str, float, float, float]]
    summary: dict
    sim: "Simulation"


class Simulation:
    def __init__(self, config: ScenarioConfig):
        config.validate()
        self.config = config
        self.rng = random.Random(config.seed)
        self.group_params = default_group()
        self.chain = ChainState(self.group_params)
        self.fees = FeeSchedule(
            mining_reward=config.mining_reward,
            micro_reward=config.micro_reward,
            register_fee=config.register_fee,
            tx_fee=config.tx_fee,
            creator_share=config.creator_share,
        )
        self.target = target_from_zero_bits(config.target_zero_bits)
        self.r1_strategy = PinnedShareR1()

        self.adversary: Optional[Adversary] = make_adversary(config)
        self.miners: list[InstitutionActor] = [
            setup_institution(b"miner/%d" % i, self.group_params)
            for i in range(config.miner_count)
        ]
        self.adv_miner: Optional[InstitutionActor] = None
        if self.adversary is not None and self.adversary.joins_as_miner:
            self.adv_miner = setup_institution(b"miner/adversary", self.group_params)
            self.adversary.miner_id = self.adv_miner.address
        elif self.adversary is not None:
            # fraud and inhibition corrupt an existing institution
            self.adversary.miner_id = self.miners[-1].address
            if self.adversary.kind == "inhibition":
                self.adversary.victim_id = self.miners[0].address

        self.institutions: dict[str, InstitutionActor] = {}
        for actor in self.miners + ([self.adv_miner] if self.adv_miner else []):
            self.institutions[actor.address] = actor
            self.chain.register_institution(actor.chain_info())

        self.honest: dict[str, bool] = {mid: True for mid in self.institutions}
        self.pinned_by: dict[str, int] = {mid: 0 for mid in self.institutions}
        self.tr_counts: dict[str, dict[int, int]] = {mid: {} for mid in self.institutions}
        self.tml_counts: dict[str, dict[int, int]] = {mid: {} for mid in self.institutions}
        self.kb_rewards: dict[str, float] = {mid: 0.0 for mid in self.institutions}
        self.total_rewards: dict[str, float] = {mid: 0.0 for mid in self.institutions}

        self.patients: dict[str, PatientActor] = {}
        self.home_institution: dict[str, str] = {}
        self.patient_leaves: dict[str, list[bytes]] = {}
        self.pinned_medical: dict[str, list[Transaction]] = {}
        self.records: dict[str, EmrRecord] = {}  # record_id -> record
        self._spawned = 0

        self.register_mempool: list[Transaction] = []
        self.scheduler = SchedulerState(
            queues={},
            interval=config.scheduler_interval,
            batch_cap=min(config.batch_cap, config.microblock_capacity),
        )
        self.submit_round: dict[bytes, int] = {}

        self.round_number = 0
        self.metrics: list[MetricsRecord] = []
        self.reputation_rows: list[tuple[int, str, float, float, float]] = []
        self.rejected_blocks = 0
        self.pinned_conflicts = 0
        self.invalid_txs = 0
        self.max_pin_latency = 0
        self.victim_latencies: list[int] = []
        self.adversary_group_rounds: list[int] = []
        self.detected_round: Optional[int] = None
        self.fraud_fees_paid = 0.0
        self.total_medical_txs = 0

    # -- helpers ----------------------------------------------------------

    def active_miner_ids(self) -> list[str]:
        ids = [m.address for m in self.miners]
        if self.adv_miner is not None and self.adversary.active(self.round_number):
            ids.append(self.adv_miner.address)
        return ids

    def power_shares(self) -> dict[str, float]:
        base = self.config.power_shares or tuple(
            1.0 / self.config.miner_count for _ in range(self.config.miner_count)
        )
        shares = {m.address: base[i] for i, m in enumerate(self.miners)}
        if self.adv_miner is not None and self.adversary.active(self.round_number):
            p = self.config.adversary_power
            shares = {mid: s * (1.0 - p) for mid, s in shares.items()}
            shares[self.adv_miner.address] = p
        return shares

    def _mark_dishonest(self, miner_id: str) -> None:
        if self.honest.get(miner_id, True):
            self.honest[miner_id] = False
            if self.detected_round is None:
                self.detected_round = self.round_number

    def reputation_of(self, miner_id: str) -> tuple[float, float, float]:
        total_pinned = len(self.chain.pinned_keyblocks)
        honest = self.honest[miner_id]
        r1 = self.r1_strategy.score(self.pinned_by[miner_id], total_pinned, honest)
        chain_length = total_pinned
        n_micro = len(self.chain.microblocks)
        if chain_length == 0 or n_micro == 0 or self.total_medical_txs == 0:
            r2 = 0.0
        else:
            c = self.config.chunk_size
            chunk_count = -(-chain_length // c)
            tr = tuple(self.tr_counts[miner_id].get(i, 0) for i in range(chunk_count))
            tml = tuple(self.tml_counts[miner_id].get(i, 0) for i in range(chunk_count))
            stats = ChunkStats(
                tr=tr,
                tml=tml,
                chunk_size=c,
                chain_length=chain_length,
                microblock_count=n_micro,
                tx_count=self.total_medical_txs,
            )
            r2 = compute_r2(stats, honest, self.config.rep_a, self.config.rep_lambda)
        return r1, r2, combine_reputation(r1, r2)

    def current_group(self, reputations: dict[str, float]) -> ConsensusGroup:
        size = min(self.config.group_size, len(reputations))
        public_keys = {
            mid: self.institutions[mid].keypair.public_key for mid in reputations
        }
        # detected misbehavers keep their zero score; the floor is a
        # bootstrap for honest miners only
        floored = {
            mid: max(rep, WEIGHT_FLOOR) if self.honest[mid] else 0.0
            for mid, rep in reputations.items()
        }
        return select_group(floored, size, public_keys, epoch=self.round_number)

    # -- traffic ------------------------------------------------------------

    def _spawn_patients(self) -> None:
        cfg = self.config
        arrivals = min(cfg.patient_arrival_per_round, cfg.patient_count - self._spawned)
        for _ in range(arrivals):
            idx = self._spawned
            self._spawned += 1
            patient = setup_patient(b"patient/%d" % idx)
            home = self.miners[self.rng.randrange(len(self.miners))]
            self.patients[patient.address] = patient
            self.home_institution[patient.address] = home.address
            tx = make_register(
                patient, home, b"identity/%d" % idx, self.group_params, fee=cfg.register_fee
            )
            self.register_mempool.append(tx)
        if self.adversary is not None:
            fraud_inst = self.institutions.get(self.adversary.miner_id)
            for seed, identity in self.adversary.zombie_register_seeds(self.round_number):
                zombie = setup_patient(seed)
                self.patients[zombie.address] = zombie
                self.home_institution[zombie.address] = fraud_inst.address
                tx = make_register(
                    zombie, fraud_inst, identity, self.group_params, fee=cfg.register_fee
                )
                self.register_mempool.append(tx)
                self.fraud_fees_paid += cfg.register_fee

    def _generate_traffic(self) -> None:
        cfg = self.config
        staged: list[Transaction] = []
        for patient_id in sorted(self.patients):
            patient = self.patients[patient_id]
            if not patient.registered:
                continue
            if self.rng.random() < cfg.upload_rate:
                if self.pinned_medical.get(patient_id):
                    inst = self.miners[self.rng.randrange(len(self.miners))]
                else:
                    inst = self.institutions[self.home_institution[patient_id]]
                record = EmrRecord(
                    plaintext=self.rng.randbytes(cfg.emr_size_bytes),
                    institution_id=inst.address,
                    patient_id=patient_id,
                    creation_round=self.round_number,
                )
                self.records[record.record_id] = record
                staged.append(
                    make_upload(patient, inst, record, self.chain, fee=cfg.tx_fee)
                )
            medical = self.pinned_medical.get(patient_id)
            if medical and self.rng.random() < cfg.label_rate:
                target = medical[-1]
                inst = self.institutions[target.payload.receiver_id]
                corrected = EmrRecord(
                    plaintext=self.rng.randbytes(cfg.emr_size_bytes),
                    institution_id=inst.address,
                    patient_id=patient_id,
                    creation_round=self.round_number,
                )
                self.records[corrected.record_id] = corrected
                staged.append(
                    make_label(
                        patient, inst, target.tx_id, corrected, self.chain, fee=cfg.tx_fee
                    )
                )
        # arrival order is arbitrary in a real network; members canonically
        # reorder an interval's submissions by id, which makes the pinned
        # history independent of the delivery permutation
        shuffler = random.Random((self.config.delivery_shuffle_seed << 20) ^ self.round_number)
        shuffler.shuffle(staged)
        staged.sort(key=lambda tx: tx.tx_id)
        for tx in staged:
            self.scheduler.enqueue(tx.payload.receiver_id, tx)
            self.submit_round[tx.tx_id] = self.round_number

    def _pack_registers(self) -> list[Transaction]:
        packed: list[Transaction] = []
        kept: list[Transaction] = []
        seen_digests: set[bytes] = set()
        for tx in sorted(self.register_mempool, key=lambda t: t.tx_id):
            ok, reason = self.chain.validate_tx(tx)
            duplicate = tx.payload.identity_digest in seen_digests
            if (not ok and reason == ALREADY_REGISTERED) or duplicate:
                pid = self.chain.patient_id_for(tx.sender_pk)
                if pid is not None and self.chain.patients[pid].identity_digest == (
                    tx.payload.identity_digest
                ):
                    continue  # benign replay of an already-pinned registration
                # the receiver certified the identity material behind this
                # digest once already; presenting it under a fresh keypair
                # is fabrication
                self._mark_dishonest(tx.payload.receiver_id)
                continue
            if not ok:
                self.invalid_txs += 1
                continue
            if len(packed) < self.config.keyblock_capacity:
                packed.append(tx)
                seen_digests.add(tx.payload.identity_digest)
            else:
                kept.append(tx)
        self.register_mempool = kept
        return packed

    # -- mining and pinning ---------------------------------------------------

    def _mine_round(self, registers: list[Transaction]):
        shares = self.power_shares()
        attempts_total = self.config.effective_attempts_per_round
        candidates = []  # (virtual_time, miner_id, block)
        adversary_blocks = []  # published out-of-band this round
        for miner_id in self.active_miner_ids():
            share = shares[miner_id]
            if share <= 0:
                continue
            is_adv = self.adversary is not None and miner_id == self.adversary.miner_id
            if is_adv and self.adversary.joins_as_miner:
                view = self.adversary.mining_view(self.chain)
                if view is None:
                    continue
            else:
                view = self.chain.view()
            budget = max(1, int(attempts_total * share + 0.5))
            block_registers = registers if view.tip_hash == self.chain.tip_hash else []
            result = mine_keyblock(
                view,
                block_registers,
                self.institutions[miner_id].keypair,
                self.target,
                budget,
                self.rng,
            )
            if result.block is None:
                continue
            if is_adv and self.adversary.joins_as_miner:
                published = self.adversary.on_solution(self.round_number, result.block)
                if published is None:
                    continue
                if published.prev_keyblock_hash != self.chain.tip_hash:
                    adversary_blocks.append(published)
                    continue
            candidates.append((result.attempts / share, miner_id, result.block))

        if self.adversary is not None:
            adversary_blocks.extend(self.adversary.due_publications(self.round_number))
        for block in adversary_blocks:
            verdict = fork_choice(self.chain.view(), block, self.group_params)
            if verdict is ForkChoice.REJECT:
                self.rejected_blocks += 1
                self._mark_dishonest(self.adversary.miner_id)
            elif verdict is ForkChoice.ACCEPT:
                # a late release that still extends the tip competes normally
                shares_now = self.power_shares()
                adv_share = shares_now.get(self.adversary.miner_id, 0.0)
                if adv_share > 0:
                    candidates.append((float("inf"), self.adversary.miner_id, block))

        candidates.sort(key=lambda entry: (entry[0], entry[1]))
        for _, miner_id, block in candidates:
            if fork_choice(self.chain.view(), block, self.group_params) is ForkChoice.ACCEPT:
                return miner_id, block
        return None, None

    def _pin_keyblock(self, group: ConsensusGroup, miner_id: str, block: KeyBlock) -> bool:
        digest = keyblock_hash(block, self.group_params)
        votes = [
            (m.miner_id, sign(digest, self.institutions[m.miner_id].keypair))
            for m in group.members
        ]
        outcome = pin(digest, votes, group)
        if isinstance(outcome, InsufficientQuorum):
            return False
        if self.chain.tip_height >= block.height:
            self.pinned_conflicts += 1
            raise InvariantViolation(
                f"second certificate at height {block.height}: pinned history forked"
            )
        pinned = dataclasses.replace(block, pin_cert=outcome)
        self.chain.add_pinned_keyblock(pinned)
        self.pinned_by[miner_id] += 1
        for miner, amount in distribute_rewards(pinned, group, self.fees).items():
            self.kb_rewards[miner] = self.kb_rewards.get(miner, 0.0) + amount
            self.total_rewards[miner] = self.total_rewards.get(miner, 0.0) + amount

        creator = max(group.members, key=lambda m: (m.weight, m.miner_id)).miner_id
        chunk = (pinned.height - 1) // self.config.chunk_size
        for tx in pinned.register_txs:
            info = self.chain.register_patient(tx)
            receiver = tx.payload.receiver_id
            counts = self.tr_counts.setdefault(receiver, {})
            counts[chunk] = counts.get(chunk, 0) + 1
            inst = self.institutions[receiver]
            leaves = [inst.info_leaf]
            self.patient_leaves[info.patient_id] = list(leaves)
            root = institution_root(leaves, inst.ch_keys.hk, inst.rng)
            self.chain.create_microblock(
                MicroBlock(
                    owner_patient_id=info.patient_id,
                    institution_root=root,
                    txs=(),
                    creator_miner_id=creator,
                    round_number=self.round_number,
                    prev_hash=self.chain.last_microblock_hash(pinned.height),
                )
            )
            actor = self.patients.get(info.patient_id)
            if actor is not None:
                actor.registered = True
        # a late-published block may carry registers still in the mempool
        pinned_ids = {tx.tx_id for tx in pinned.register_txs}
        if pinned_ids:
            self.register_mempool = [
                tx for tx in self.register_mempool if tx.tx_id not in pinned_ids
            ]
        return True

    def _pin_tx_batch(self, group: ConsensusGroup, batch: list[Transaction]) -> int:
        pinned_count = 0
        chunk = (self.chain.tip_height - 1) // self.config.chunk_size
        requeue: dict[str, list[Transaction]] = {}
        for tx in batch:
            ok, reason = self.chain.validate_tx(tx)
            if not ok:
                self.invalid_txs += 1
                self.submit_round.pop(tx.tx_id, None)
                continue
            votes = []
            for m in group.members:
                if (
                    self.adversary is not None
                    and m.miner_id == self.adversary.miner_id
                    and not self.adversary.votes_for_tx(tx)
                ):
                    continue
                votes.append(
                    (m.miner_id, sign(tx.tx_id, self.institutions[m.miner_id].keypair))
                )
            outcome = pin(tx.tx_id, votes, group)
            if isinstance(outcome, InsufficientQuorum):
                # back to the head of its queue (FIFO preserved); retried
                # next interval
                requeue.setdefault(tx.payload.receiver_id, []).append(tx)
                continue

            patient_id = self.chain.patient_id_for(tx.sender_pk)
            receiver = tx.payload.receiver_id
            inst = self.institutions[receiver]
            leaves = self.patient_leaves[patient_id]
            if inst.info_leaf not in leaves:
                # first record at this institution: extend the certified set
                # under the same root via a trapdoor collision at the home
                # institution, so the stored root never changes
                leaves.append(inst.info_leaf)
                home = self.institutions[self.home_institution.get(
                    patient_id, self.chain.microblocks[patient_id].creator_miner_id
                )]
                current = self.chain.microblocks[patient_id]
                new_root = update_institution_root(
                    current.institution_root, leaves, home.ch_keys.hk, home.ch_keys.tk
                )
                self.chain.replace_microblock(
                    dataclasses.replace(current, institution_root=new_root)
                )
            self.chain.append_to_microblock(patient_id, tx, outcome)
            pinned_count += 1
            self.total_medical_txs += 1
            counts = self.tml_counts.setdefault(receiver, {})
            counts[chunk] = counts.get(chunk, 0) + 1
            if tx.tx_type is TxType.MEDICAL:
                self.pinned_medical.setdefault(patient_id, []).append(tx)

            microblock = self.chain.microblocks[patient_id]
            for miner, amount in distribute_rewards(
                microblock, group, self.fees, pin_cert=outcome, batch_txs=[tx]
            ).items():
                self.total_rewards[miner] = self.total_rewards.get(miner, 0.0) + amount

            latency = self.round_number - self.submit_round.pop(tx.tx_id, self.round_number)
            self.max_pin_latency = max(self.max_pin_latency, latency)
            if (
                self.adversary is not None
                and self.adversary.kind == "inhibition"
                and receiver == self.adversary.victim_id
            ):
                self.victim_latencies.append(latency)
        for receiver_id, txs in requeue.items():
            self.scheduler.queues[receiver_id].extendleft(reversed(txs))
        return pinned_count

    # -- round loop ------------------------------------------------------------

    def run_round(self) -> MetricsRecord:
        cfg = self.config
        self.round_number += 1
        self.chain.current_round = self.round_number

        reputations = {}
        for miner_id in self.active_miner_ids():
            r1, r2, combined = self.reputation_of(miner_id)
            reputations[miner_id] = combined
            self.reputation_rows.append((self.round_number, miner_id, r1, r2, combined))
        group = self.current_group(reputations)
        adv_in_group = int(
            self.adversary is not None
            and group.member(self.adversary.miner_id) is not None
        )
        if adv_in_group:
            self.adversary_group_rounds.append(self.round_number)

        self._spawn_patients()
        self._generate_traffic()

        registers = self._pack_registers()
        winner, block = self._mine_round(registers)
        registers_pinned = 0
        keyblock_pinned = 0
        if block is not None and self._pin_keyblock(group, winner, block):
            keyblock_pinned = 1
            registers_pinned = len(block.register_txs)
        elif block is not None:
            self.register_mempool.extend(block.register_txs)
        else:
            self.register_mempool.extend(registers)

        micro_pinned = 0
        if self.round_number % cfg.scheduler_interval == 0 and self.chain.tip_height >= 1:
            batch = schedule_batch(self.scheduler, reputations)
            micro_pinned = self._pin_tx_batch(group, batch)

        kb_tps = registers_pinned / cfg.kb_interval_s
        if micro_pinned > 0:
            bft_time = group.size * (cfg.bft_base_s + micro_pinned * cfg.per_tx_verify_s)
            micro_tps = micro_pinned / bft_time
        else:
            micro_tps = 0.0

        stalled = sum(
            1
            for tx_id, submitted in self.submit_round.items()
            if self.round_number - submitted > 2
        )
        record = MetricsRecord(
            round=self.round_number,
            keyblock_pinned=keyblock_pinned,
            registers_pinned=registers_pinned,
            micro_txs_pinned=micro_pinned,
            keyblock_tps=kb_tps,
            microblock_tps=micro_tps,
            pinned_conflicts=self.pinned_conflicts,
            rejected_blocks=self.rejected_blocks,
            adversary_in_group=adv_in_group,
            adversary_reward_share=self.adversary_reward_share(),
            max_pin_latency=self.max_pin_latency,
            stalled_txs=stalled,
        )
        self.metrics.append(record)
        return record

    def adversary_reward_share(self) -> float:
        if self.adversary is None or self.adversary.miner_id is None:
            return 0.0
        if self.adversary.joins_as_miner:
            pool, earned = self.kb_rewards, self.kb_rewards.get(self.adversary.miner_id, 0.0)
        else:
            pool, earned = self.total_rewards, self.total_rewards.get(
                self.adversary.miner_id, 0.0
            )
        total = sum(pool.values())
        return earned / total if total > 0 else 0.0

    def chain_digest(self) -> str:
        """Content hash over the pinned history; equal digests mean equal
        pinned keyblocks and microblocks."""
        h = hashlib.sha256()
        for kb in self.chain.pinned_keyblocks:
            h.update(keyblock_hash(kb, self.group_params))
        for patient_id in sorted(self.chain.microblocks):
            h.update(microblock_hash(self.chain.microblocks[patient_id], self.group_params))
        return h.hexdigest()

    def summary(self) -> dict:
        total_kb = sum(self.kb_rewards.values())
        return {
            "rounds": self.round_number,
            "pinned_keyblocks": len(self.chain.pinned_keyblocks),
            "patients_registered": len(self.chain.patients),
            "medical_txs_pinned": self.total_medical_txs,
            "pinned_conflicts": self.pinned_conflicts,
            "rejected_blocks": self.rejected_blocks,
            "invalid_txs": self.invalid_txs,
            "max_pin_latency": self.max_pin_latency,
            "victim_max_latency": max(self.victim_latencies, default=0),
            "adversary_type": self.config.adversary_type,
            "adversary_reward_share": self.adversary_reward_share(),
            "adversary_group_rounds": len(self.adversary_group_rounds),
            "adversary_detected_round": -1 if self.detected_round is None else self.detected_round,
            "fraud_fees_paid": self.fraud_fees_paid,
            "mining_rewards_total": total_kb,
            "store_accesses": self.chain.store_accesses,
            "chain_digest": self.chain_digest(),
        }


def run_scenario(config: ScenarioConfig) -> SimulationResult:
    sim = Simulation(config)
    for _ in range(config.rounds):
        sim.run_round()
    return SimulationResult(
        config=config,
        records=sim.metrics,
        reputation_rows=sim.reputation_rows,
        summary=sim.summary(),
        sim=sim,
    )
