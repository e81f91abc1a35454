use super::{EmitOptions, StLayout, StProgram};
use crate::grid_model::GridConfig;

struct Out {
    text: String,
    depth: usize,
}

impl Out {
    fn line(&mut self, s: &str) {
        if s.is_empty() {
            self.text.push('\n');
            return;
        }
        for _ in 0..self.depth {
            self.text.push_str("    ");
        }
        self.text.push_str(s);
        self.text.push('\n');
    }

    fn open(&mut self, s: &str) {
        self.line(s);
        self.depth += 1;
    }

    fn close(&mut self, s: &str) {
        self.depth -= 1;
        self.line(s);
    }

    /// Emits `lines` verbatim, each line indented by the current depth plus
    /// its own leading spaces.
    fn block(&mut self, lines: &str) {
        for l in lines.lines() {
            self.line(l);
        }
    }
}

fn list<T: ToString>(items: impl IntoIterator<Item = T>) -> String {
    let v: Vec<String> = items.into_iter().map(|x| x.to_string()).collect();
    format!("[{}]", v.join(", "))
}

fn bool_lit(b: bool) -> &'static str {
    if b {
        "TRUE"
    } else {
        "FALSE"
    }
}

fn ints(out: &mut Out, name: &str, ty: &str, values: &[i64]) {
    out.line(&format!(
        "{name} : ARRAY[0..{}] OF {ty} := {};",
        values.len() - 1,
        list(values)
    ));
}

fn bools(out: &mut Out, name: &str, values: &[bool]) {
    out.line(&format!(
        "{name} : ARRAY[0..{}] OF BOOL := {};",
        values.len() - 1,
        list(values.iter().map(|&b| bool_lit(b)))
    ));
}

fn index_comment(out: &mut Out, what: &str, ids: &[String]) {
    if ids.is_empty() {
        out.line(&format!("(* {what}: none *)"));
        return;
    }
    let body: Vec<String> = ids
        .iter()
        .enumerate()
        .map(|(i, id)| format!("{}={id}", i + 1))
        .collect();
    out.line(&format!("(* {what}: {} *)", body.join(" ")));
}

const LSE_BODY: &str = "\
(* effective measurements: open elements carry no power and no reserve *)
FOR g := 1 TO N_GENS DO
    IF GEN_CLOSED[g] THEN
        GP[g] := GEN_P[g];
        GSR[g] := GEN_SR[g];
    ELSE
        GP[g] := 0.0;
        GSR[g] := 0.0;
    END_IF;
END_FOR;
FOR l := 0 TO N_LOADS DO
    IF l > 0 AND LOAD_CLOSED[l] THEN
        LP[l] := LOAD_P[l];
    ELSE
        LP[l] := 0.0;
    END_IF;
    FOR e := 0 TO N_EVENTS DO
        SM[l, e] := FALSE;
    END_FOR;
END_FOR;
FOR e := 0 TO N_EVENTS DO
    INFEASIBLE[e] := FALSE;
END_FOR;

(* present topology, each busbar labelled with the lowest busbar index of its island *)
FOR b := 1 TO N_BUSBARS DO
    PRE[b] := b;
END_FOR;
FOR it := 1 TO N_BUSBARS DO
    FOR k := 1 TO N_BUSTIES DO
        IF BT_CLOSED[k] THEN
            a := PRE[BT_A[k]];
            c := PRE[BT_B[k]];
            IF a < c THEN
                PRE[BT_B[k]] := a;
            ELSIF c < a THEN
                PRE[BT_A[k]] := c;
            END_IF;
        END_IF;
    END_FOR;
END_FOR;

FOR e := 1 TO N_EVENTS DO
    kind := EVENT_KIND[e];
    tgt := EVENT_TARGET[e];

    (* a column whose element is already open stays empty *)
    IF kind = 1 THEN
        skip := NOT GEN_CLOSED[tgt];
    ELSIF kind = 2 THEN
        skip := NOT BT_CLOSED[tgt];
    ELSIF kind = 3 THEN
        skip := TRUE;
        FOR g := 1 TO N_GENS DO
            IF GEN_BLDG[g] = tgt AND GEN_CLOSED[g] THEN
                skip := FALSE;
            END_IF;
        END_FOR;
    ELSE
        skip := NOT (HAS_TIE AND TIE_CLOSED);
    END_IF;

    IF NOT skip THEN
        (* islands after the event; only a bustie opening changes them *)
        FOR b := 1 TO N_BUSBARS DO
            COMP[b] := b;
        END_FOR;
        FOR it := 1 TO N_BUSBARS DO
            FOR k := 1 TO N_BUSTIES DO
                IF BT_CLOSED[k] AND NOT (kind = 2 AND k = tgt) THEN
                    a := COMP[BT_A[k]];
                    c := COMP[BT_B[k]];
                    IF a < c THEN
                        COMP[BT_B[k]] := a;
                    ELSIF c < a THEN
                        COMP[BT_A[k]] := c;
                    END_IF;
                END_IF;
            END_FOR;
        END_FOR;

        FOR root := 1 TO N_BUSBARS DO
            IF COMP[root] = root THEN
                affected := FALSE;
                pm := 0.0;
                sr_tot := 0.0;
                IF kind = 1 THEN
                    IF COMP[GEN_BUS[tgt]] = root THEN
                        affected := TRUE;
                        FOR g := 1 TO N_GENS DO
                            IF GEN_CLOSED[g] AND COMP[GEN_BUS[g]] = root THEN
                                sr_tot := sr_tot + GSR[g];
                            END_IF;
                        END_FOR;
                        pm := GP[tgt] - (sr_tot - GSR[tgt]);
                    END_IF;
                ELSIF kind = 2 THEN
                    IF PRE[root] = PRE[BT_A[tgt]] THEN
                        affected := TRUE;
                        load_sum := 0.0;
                        FOR l := 1 TO N_LOADS DO
                            IF LOAD_CLOSED[l] AND COMP[LOAD_BUS[l]] = root THEN
                                load_sum := load_sum + LP[l];
                            END_IF;
                        END_FOR;
                        gen_sum := 0.0;
                        FOR g := 1 TO N_GENS DO
                            IF GEN_CLOSED[g] AND COMP[GEN_BUS[g]] = root THEN
                                gen_sum := gen_sum + GP[g];
                            END_IF;
                        END_FOR;
                        IF HAS_TIE AND TIE_CLOSED THEN
                            IF COMP[TIE_BUS] = root THEN
                                gen_sum := gen_sum + IMPORT_P;
                            END_IF;
                        END_IF;
                        FOR g := 1 TO N_GENS DO
                            IF GEN_CLOSED[g] AND COMP[GEN_BUS[g]] = root THEN
                                sr_tot := sr_tot + GSR[g];
                            END_IF;
                        END_FOR;
                        pm := load_sum - gen_sum - sr_tot;
                    END_IF;
                ELSIF kind = 3 THEN
                    FOR g := 1 TO N_GENS DO
                        IF GEN_BLDG[g] = tgt AND COMP[GEN_BUS[g]] = root THEN
                            affected := TRUE;
                        END_IF;
                    END_FOR;
                    IF affected THEN
                        lost := 0.0;
                        FOR g := 1 TO N_GENS DO
                            IF GEN_BLDG[g] = tgt AND GEN_CLOSED[g] AND COMP[GEN_BUS[g]] = root THEN
                                lost := lost + GP[g];
                            END_IF;
                        END_FOR;
                        FOR g := 1 TO N_GENS DO
                            IF GEN_CLOSED[g] AND COMP[GEN_BUS[g]] = root AND GEN_BLDG[g] <> tgt THEN
                                sr_tot := sr_tot + GSR[g];
                            END_IF;
                        END_FOR;
                        pm := lost - sr_tot;
                    END_IF;
                ELSE
                    IF COMP[TIE_BUS] = root THEN
                        affected := TRUE;
                        FOR g := 1 TO N_GENS DO
                            IF GEN_CLOSED[g] AND COMP[GEN_BUS[g]] = root THEN
                                sr_tot := sr_tot + GSR[g];
                            END_IF;
                        END_FOR;
                        pm := IMPORT_P - sr_tot;
                    END_IF;
                END_IF;

                IF affected AND pm > 0.0 THEN
                    nc := 0;
                    FOR l := 1 TO N_LOADS DO
                        IF SHEDDABLE[l] AND LOAD_CLOSED[l] AND COMP[LOAD_BUS[l]] = root THEN
                            nc := nc + 1;
                            CAND[nc] := l;
                        END_IF;
                    END_FOR;
                    (* order: priority ascending, power descending, id ascending *)
                    FOR i := 1 TO nc - 1 DO
                        best := i;
                        FOR j := i + 1 TO nc DO
                            a := CAND[j];
                            c := CAND[best];
                            better := PRIORITY[a] < PRIORITY[c];
                            IF PRIORITY[a] = PRIORITY[c] THEN
                                better := LP[a] > LP[c] OR (LP[a] = LP[c] AND ID_RANK[a] < ID_RANK[c]);
                            END_IF;
                            IF better THEN
                                best := j;
                            END_IF;
                        END_FOR;
                        tmp := CAND[i];
                        CAND[i] := CAND[best];
                        CAND[best] := tmp;
                    END_FOR;
                    (* mark until the shed power strictly exceeds the mismatch *)
                    ps := 0.0;
                    done := FALSE;
                    FOR i := 1 TO nc DO
                        IF NOT done THEN
                            l := CAND[i];
                            ps := ps + LP[l];
                            SM[l, e] := TRUE;
                            IF ps > pm THEN
                                done := TRUE;
                            END_IF;
                        END_IF;
                    END_FOR;
                    IF NOT done THEN
                        INFEASIBLE[e] := TRUE;
                    END_IF;
                END_IF;
            END_IF;
        END_FOR;
    END_IF;
END_FOR;
";

const EDSA_BODY: &str = "\
(* a building is lost when all its units are open now and one was closed before *)
FOR k := 1 TO N_BUILDINGS DO
    all_open := TRUE;
    any_prev := FALSE;
    FOR g := 1 TO N_GENS DO
        IF GEN_BLDG[g] = k THEN
            IF GEN_CLOSED[g] THEN
                all_open := FALSE;
            END_IF;
            IF PREV_GEN_CLOSED[g] THEN
                any_prev := TRUE;
            END_IF;
        END_IF;
    END_FOR;
    LOST[k] := all_open AND any_prev;
END_FOR;

EVENT := 0;
DETECTED[0] := FALSE;
FOR e := 1 TO N_EVENTS DO
    kind := EVENT_KIND[e];
    tgt := EVENT_TARGET[e];
    IF kind = 1 THEN
        DETECTED[e] := PREV_GEN_CLOSED[tgt] AND NOT GEN_CLOSED[tgt] AND NOT LOST[GEN_BLDG[tgt]];
    ELSIF kind = 2 THEN
        DETECTED[e] := PREV_BT_CLOSED[tgt] AND NOT BT_CLOSED[tgt];
    ELSIF kind = 3 THEN
        DETECTED[e] := LOST[tgt];
    ELSE
        DETECTED[e] := PREV_TIE_CLOSED AND NOT TIE_CLOSED;
    END_IF;
    IF DETECTED[e] AND EVENT = 0 THEN
        EVENT := e;
    END_IF;
END_FOR;

(* the first detected event fires its column; loads already open are left alone *)
FOR l := 0 TO N_LOADS DO
    TRIP[l] := ARMED AND EVENT > 0 AND l > 0 AND SM[l, EVENT] AND LOAD_CLOSED[l];
END_FOR;
";

pub(super) fn emit(config: &GridConfig, options: &EmitOptions) -> StProgram {
    let layout = StLayout::new(config);
    let (ng, nl, nb, nt, ne, nk) = (
        layout.generators.len(),
        layout.loads.len(),
        layout.busbars.len(),
        layout.busties.len(),
        layout.events.len(),
        layout.buildings.len(),
    );

    let bus_of =
        |id: &crate::grid_model::BusbarId| config.busbar_index(id).map_or(0, |i| i as i64 + 1);
    let bldg_of = |g: &crate::grid_model::Generator| {
        layout
            .buildings
            .iter()
            .position(|b| *b == g.building.as_str())
            .map_or(0, |i| i as i64 + 1)
    };
    let mut sorted_ids: Vec<&str> = config.loads.iter().map(|l| l.id.as_str()).collect();
    sorted_ids.sort_unstable();

    let gen_bus: Vec<i64> = std::iter::once(0)
        .chain(config.generators.iter().map(|g| bus_of(&g.busbar)))
        .collect();
    let gen_bldg: Vec<i64> = std::iter::once(0)
        .chain(config.generators.iter().map(bldg_of))
        .collect();
    let load_bus: Vec<i64> = std::iter::once(0)
        .chain(config.loads.iter().map(|l| bus_of(&l.busbar)))
        .collect();
    let sheddable: Vec<bool> = std::iter::once(false)
        .chain(config.loads.iter().map(|l| l.sheddable))
        .collect();
    let priority: Vec<i64> = std::iter::once(0)
        .chain(config.loads.iter().map(|l| i64::from(l.priority)))
        .collect();
    let id_rank: Vec<i64> = std::iter::once(0)
        .chain(config.loads.iter().map(|l| {
            sorted_ids
                .binary_search(&l.id.as_str())
                .map_or(0, |r| r as i64 + 1)
        }))
        .collect();
    let bt_a: Vec<i64> = std::iter::once(0)
        .chain(config.busties.iter().map(|t| bus_of(&t.endpoints.0)))
        .collect();
    let bt_b: Vec<i64> = std::iter::once(0)
        .chain(config.busties.iter().map(|t| bus_of(&t.endpoints.1)))
        .collect();
    let (kinds, targets) = layout.event_codes(config);
    let tie_bus = config.active_tie().map_or(0, |t| bus_of(&t.busbar));

    let mut o = Out {
        text: String::new(),
        depth: 0,
    };
    o.line("(* Fast load shedding: load selection and event detection blocks. *)");
    o.line(&format!(
        "(* plant: {nb} busbars, {nt} busties, {ng} generators, {nl} loads, {ne} events *)"
    ));
    index_comment(&mut o, "busbars", &layout.busbars);
    index_comment(&mut o, "busties", &layout.busties);
    index_comment(&mut o, "generators", &layout.generators);
    index_comment(&mut o, "buildings", &layout.buildings);
    index_comment(&mut o, "loads", &layout.loads);
    index_comment(&mut o, "events", &layout.events);
    o.line("(* event kinds: 1 generator trip, 2 bustie open, 3 building loss, 4 grid blackout *)");
    o.line("");

    // load selection block
    o.open(&format!("FUNCTION_BLOCK {}", options.lse_block));
    o.open("VAR_INPUT");
    o.line(&format!("GEN_CLOSED : ARRAY[0..{ng}] OF BOOL;"));
    o.line(&format!("GEN_P : ARRAY[0..{ng}] OF LREAL;"));
    o.line(&format!("GEN_SR : ARRAY[0..{ng}] OF LREAL;"));
    o.line(&format!("LOAD_CLOSED : ARRAY[0..{nl}] OF BOOL;"));
    o.line(&format!("LOAD_P : ARRAY[0..{nl}] OF LREAL;"));
    ints(&mut o, "PRIORITY", "DINT", &priority);
    o.line(&format!("BT_CLOSED : ARRAY[0..{nt}] OF BOOL;"));
    o.line("TIE_CLOSED : BOOL;");
    o.line("IMPORT_P : LREAL;");
    o.close("END_VAR");
    o.open("VAR_OUTPUT");
    o.line(&format!("SM : ARRAY[0..{nl}, 0..{ne}] OF BOOL;"));
    o.line(&format!("INFEASIBLE : ARRAY[0..{ne}] OF BOOL;"));
    o.close("END_VAR");
    o.open("VAR CONSTANT");
    o.line(&format!("N_GENS : INT := {ng};"));
    o.line(&format!("N_LOADS : INT := {nl};"));
    o.line(&format!("N_BUSBARS : INT := {nb};"));
    o.line(&format!("N_BUSTIES : INT := {nt};"));
    o.line(&format!("N_EVENTS : INT := {ne};"));
    ints(&mut o, "GEN_BUS", "INT", &gen_bus);
    ints(&mut o, "GEN_BLDG", "INT", &gen_bldg);
    ints(&mut o, "LOAD_BUS", "INT", &load_bus);
    bools(&mut o, "SHEDDABLE", &sheddable);
    ints(&mut o, "ID_RANK", "INT", &id_rank);
    ints(&mut o, "BT_A", "INT", &bt_a);
    ints(&mut o, "BT_B", "INT", &bt_b);
    o.line(&format!("HAS_TIE : BOOL := {};", bool_lit(tie_bus > 0)));
    o.line(&format!("TIE_BUS : INT := {tie_bus};"));
    ints(&mut o, "EVENT_KIND", "INT", &kinds);
    ints(&mut o, "EVENT_TARGET", "INT", &targets);
    o.close("END_VAR");
    o.open("VAR");
    o.line(&format!("GP, GSR : ARRAY[0..{ng}] OF LREAL;"));
    o.line(&format!("LP : ARRAY[0..{nl}] OF LREAL;"));
    o.line(&format!("CAND : ARRAY[0..{nl}] OF INT;"));
    o.line(&format!("PRE, COMP : ARRAY[0..{nb}] OF INT;"));
    o.line("e, g, l, b, k, i, j, it, a, c, kind, tgt, root, nc, best, tmp : INT;");
    o.line("skip, affected, better, done : BOOL;");
    o.line("pm, ps, sr_tot, load_sum, gen_sum, lost : LREAL;");
    o.close("END_VAR");
    o.line("");
    o.block(LSE_BODY);
    o.close("END_FUNCTION_BLOCK");
    o.line("");

    // event detection and action block
    o.open(&format!("FUNCTION_BLOCK {}", options.edsa_block));
    o.open("VAR_INPUT");
    o.line(&format!(
        "PREV_GEN_CLOSED, GEN_CLOSED : ARRAY[0..{ng}] OF BOOL;"
    ));
    o.line(&format!(
        "PREV_BT_CLOSED, BT_CLOSED : ARRAY[0..{nt}] OF BOOL;"
    ));
    o.line("PREV_TIE_CLOSED, TIE_CLOSED : BOOL;");
    o.line(&format!("LOAD_CLOSED : ARRAY[0..{nl}] OF BOOL;"));
    o.line(&format!("SM : ARRAY[0..{nl}, 0..{ne}] OF BOOL;"));
    o.line("ARMED : BOOL;");
    o.close("END_VAR");
    o.open("VAR_OUTPUT");
    o.line(&format!("TRIP : ARRAY[0..{nl}] OF BOOL;"));
    o.line(&format!("DETECTED : ARRAY[0..{ne}] OF BOOL;"));
    o.line("EVENT : INT;");
    o.close("END_VAR");
    o.open("VAR CONSTANT");
    o.line(&format!("N_GENS : INT := {ng};"));
    o.line(&format!("N_LOADS : INT := {nl};"));
    o.line(&format!("N_BUILDINGS : INT := {nk};"));
    o.line(&format!("N_EVENTS : INT := {ne};"));
    ints(&mut o, "GEN_BLDG", "INT", &gen_bldg);
    ints(&mut o, "EVENT_KIND", "INT", &kinds);
    ints(&mut o, "EVENT_TARGET", "INT", &targets);
    o.close("END_VAR");
    o.open("VAR");
    o.line(&format!("LOST : ARRAY[0..{nk}] OF BOOL;"));
    o.line("all_open, any_prev : BOOL;");
    o.line("e, g, k, l, kind, tgt : INT;");
    o.close("END_VAR");
    o.line("");
    o.block(EDSA_BODY);
    o.close("END_FUNCTION_BLOCK");

    StProgram {
        source: o.text,
        n_gens: ng,
        n_loads: nl,
        n_busbars: nb,
        n_busties: nt,
        n_events: ne,
        n_buildings: nk,
        lse_block: options.lse_block.clone(),
        edsa_block: options.edsa_block.clone(),
        layout,
    }
}
