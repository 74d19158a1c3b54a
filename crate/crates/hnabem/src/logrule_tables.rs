//! Precomputed generalized log-weight Gaussian rules.
//!
//! The construction in [`logrule`](crate::logrule) is deterministic but
//! iterative; for the sizes reached by the default configurations the
//! converged rules are cached here as `f64` tables (the residual landscape
//! is flat enough that rounding to `f64` preserves the moment contract,
//! which `tabulated_rules_meet_contract` audits directly on these tables).
//! Generated by the ignored test `regenerate_rule_tables` in `logrule`.

use crate::logrule::GenKind;

#[rustfmt::skip]
const LEG40_X: [f64; 40] = [
    1.640338018079733e-5,
    0.00024252207180674431,
    0.0011749620165009162,
    0.0035366681794582315,
    0.008161234644381772,
    0.01588435747790868,
    0.02745823051601036,
    0.043489495540919576,
    0.06439116222745854,
    0.09032716701672898,
    0.12108638134837146,
    0.15558969349284463,
    0.18959318534488012,
    0.2179719240215732,
    0.2534870199084878,
    0.293855845919447,
    0.32788476795581917,
    0.3664643938758795,
    0.40987230209562947,
    0.4458959616283927,
    0.487652627633097,
    0.5319367705545235,
    0.5674909508099005,
    0.6097195720016807,
    0.6511667852063616,
    0.6855834659097928,
    0.7249566193492872,
    0.7592176613004796,
    0.7925268611303742,
    0.827138471837987,
    0.8541751900715808,
    0.8825013532035666,
    0.9077322689983829,
    0.9285322721272392,
    0.9493832315745931,
    0.9646262910267177,
    0.9780702563889683,
    0.9884496735147712,
    0.9949992949526317,
    0.9992013364534736,
];

#[rustfmt::skip]
const LEG40_W: [f64; 40] = [
    6.250478956717635e-5,
    0.0004739295149627204,
    0.0015134469653376522,
    0.003350743053733647,
    0.006039098110979606,
    0.009533524231829647,
    0.013716086578478452,
    0.01841609355002592,
    0.02341622824486332,
    0.028426337985860396,
    0.032940717867005954,
    0.03546974882211569,
    0.0307869739494468,
    0.029666418373699297,
    0.04022444701430826,
    0.03797264396925054,
    0.03312058167008863,
    0.04365587414592839,
    0.040072565106096164,
    0.03595460987141579,
    0.046211192624283054,
    0.03922807298886072,
    0.036806823178438614,
    0.045119546986913284,
    0.03585408248378195,
    0.03688021566223818,
    0.03877860940275355,
    0.031042662106220188,
    0.03605291845936316,
    0.030724626499125517,
    0.026287587168921153,
    0.028736010662174957,
    0.02135721736466912,
    0.021635059451497452,
    0.018414680840074846,
    0.013405556929502372,
    0.01284691874980202,
    0.007776674441109862,
    0.0057527531261495676,
    0.0022762170591263684,
];

#[rustfmt::skip]
const LEG80_X: [f64; 80] = [
    4.202805877969773e-6,
    6.212613466478873e-5,
    0.0003009464846220065,
    0.0009060000928816836,
    0.002092167375460265,
    0.004078149574340447,
    0.007067397573020285,
    0.011235146908031778,
    0.01671804257966507,
    0.023598719727080136,
    0.031861206294889734,
    0.041197215772388614,
    0.05020180698044453,
    0.0582128362673533,
    0.06891790658622575,
    0.08040400267089584,
    0.09033938519708755,
    0.10300960561527059,
    0.11632631447330366,
    0.1280237143634694,
    0.14256695585939683,
    0.15651305810630395,
    0.17079908643971362,
    0.18682761961113292,
    0.2010300663518426,
    0.2179948891689246,
    0.23437106606785882,
    0.2511352928668425,
    0.26937705018407065,
    0.28571935252059355,
    0.30465278144407754,
    0.3222363369556174,
    0.34127688317558863,
    0.36072654743054533,
    0.3789663756273921,
    0.39915885953061053,
    0.4173072677648676,
    0.43770034053777074,
    0.4569292691449433,
    0.47698551052665805,
    0.4974590348702557,
    0.5165150377130721,
    0.5372237491635965,
    0.5558133190503474,
    0.5762054971602676,
    0.5951745040691281,
    0.614923351161601,
    0.6345153349151429,
    0.6531256650702671,
    0.6727084622854713,
    0.6902856901221194,
    0.7092147389779547,
    0.7263416340954556,
    0.7443360486803684,
    0.7613711587797239,
    0.7781364212838638,
    0.7949343401417308,
    0.8102590283089631,
    0.8262670194380376,
    0.8403934022536691,
    0.8551842352344096,
    0.8684572452698025,
    0.8818240217078355,
    0.8943279642429632,
    0.9061409699934049,
    0.9177008714468932,
    0.9279370781186028,
    0.9382548602801135,
    0.9470634468977723,
    0.9558939675834385,
    0.963430834442204,
    0.9706413933271382,
    0.9769002327143177,
    0.9824571831698535,
    0.9873336286722324,
    0.9912703813098177,
    0.99465156183251,
    0.9970407803498768,
    0.9988520958695221,
    0.99975461817893,
];

#[rustfmt::skip]
const LEG80_W: [f64; 80] = [
    1.601404323768877e-5,
    0.0001213928786052466,
    0.00038763469292231413,
    0.0008587231560022372,
    0.0015503774333063352,
    0.002455703258142146,
    0.0035521563397866015,
    0.004806333031162803,
    0.006173801885855881,
    0.007587101400368475,
    0.008898007703471976,
    0.009565604575491037,
    0.00804961563680911,
    0.009062663120237024,
    0.01181950331116621,
    0.01044174956115805,
    0.010749356262100187,
    0.01395374719999856,
    0.011931279393509134,
    0.012913979527494705,
    0.015124450392808226,
    0.013004889794318733,
    0.016016761827722305,
    0.014861847189319743,
    0.015127164113737115,
    0.01768189614176336,
    0.015371109006609722,
    0.018522286430251687,
    0.01679831200220146,
    0.0174988114662841,
    0.01898169118187643,
    0.017181207978025703,
    0.02051424072779952,
    0.01780147844147694,
    0.019833808273686446,
    0.01910341441573172,
    0.018795306421801345,
    0.020731984798707363,
    0.018459069432586243,
    0.0214867785081021,
    0.01880323856739157,
    0.020452349409785995,
    0.01957700961149462,
    0.019100534231171154,
    0.020454306407223524,
    0.018327301082481904,
    0.02079461181273951,
    0.01809700624097196,
    0.019852477054982717,
    0.01821473895363756,
    0.018236765580451533,
    0.018412511134127084,
    0.016889112265262837,
    0.018373807478599055,
    0.015977438280519694,
    0.01764503470317044,
    0.01540333327776774,
    0.016068568195722943,
    0.01498611084583111,
    0.014268153034977252,
    0.014456785081743148,
    0.012741883170673008,
    0.013586610269496273,
    0.011512754824764918,
    0.01225678812669794,
    0.01047053040117228,
    0.010542915584803183,
    0.009487390357383454,
    0.008743138323694562,
    0.008391391438541868,
    0.007090801263830039,
    0.007051976542920073,
    0.0055948561745249245,
    0.005495531662756036,
    0.004179715430635152,
    0.003826763919588644,
    0.0027763743723070956,
    0.0021634711653265577,
    0.0013257387003394907,
    0.0005789220648551675,
];

/// Returns the cached `n`-point rule of the given kind, if tabulated.
pub(crate) fn lookup(kind: GenKind, n: usize) -> Option<(&'static [f64], &'static [f64])> {
    match (kind, n) {
        (GenKind::LegendreLog, 40) => Some((&LEG40_X, &LEG40_W)),
        (GenKind::LegendreLog, 80) => Some((&LEG80_X, &LEG80_W)),
        _ => None,
    }
}
