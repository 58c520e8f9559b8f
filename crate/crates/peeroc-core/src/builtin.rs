//! Built-in coefficient documents in the triplet text format.
//!
//! Every entry is a string: either an exact rational "p/q" or a
//! decimal literal kept verbatim at its published precision.

pub(crate) const AP4O43BDF: &str = r#"{
  "name": "AP4o43bdf",
  "s": 4, "q1": 4, "q2": 3,
  "c": ["1/4", "1/2", "3/4", "1"],
  "A": [
    ["25/12", "0", "0", "0"],
    ["-4", "25/12", "0", "0"],
    ["3", "-4", "25/12", "0"],
    ["-4/3", "3", "-4", "25/12"]
  ],
  "K": [
    ["1/4", "0", "0", "0"],
    ["0", "1/4", "0", "0"],
    ["0", "0", "1/4", "0"],
    ["0", "0", "0", "1/4"]
  ],
  "A0": [
    ["2", "1/2", "0", "0"],
    ["-265/96", "17/96", "11/288", "0"],
    ["7/6", "-47/24", "25/12", "0"],
    ["-21/32", "227/96", "-1163/288", "25/12"]
  ],
  "K0": [
    ["1/2", "0", "0", "0"],
    ["-77/192", "3/32", "0", "0"],
    ["67/192", "17/96", "155/576", "0"],
    ["-19/192", "-17/192", "0", "1/4"]
  ],
  "AN": [
    ["635/96", "0", "0", "0"],
    ["-1235/72", "35/32", "67/96", "-43/288"],
    ["4475/288", "-35/24", "0", "43/72"],
    ["-5", "35/96", "-67/96", "53/96"]
  ],
  "KN": [
    ["25/32", "0", "0", "0"],
    ["-5/3", "61/192", "-1/192", "0"],
    ["115/64", "-13/48", "23/64", "0"],
    ["-185/288", "13/96", "-1/192", "43/576"]
  ]
}"#;

pub(crate) const AP4O43DIF: &str = r#"{
  "name": "AP4o43dif",
  "s": 4, "q1": 4, "q2": 3,
  "c": ["3/22", "53/132", "97/132", "1"],
  "A": [
    ["2.713996187194519", "0", "0", "0"],
    ["-5.753019558612675", "2.063116456071261", "0", "0"],
    ["5.300000000000000", "-4.392801539381829", "2.202673482804081", "0"],
    ["-2.313267438350870", "2.523025304770754", "-2.619073109161321", "1.275350214666080"]
  ],
  "K": [
    ["0.2212740342685062", "0", "0", "0"],
    ["0", "0.2910929443629617", "0", "0"],
    ["0", "0", "0.3576330213685321", "0"],
    ["0", "0", "0", "0.13"]
  ],
  "A0": [
    ["1.1582197171362010", "0.04624378638947835", "0", "0"],
    ["-0.7020381998219871", "1.55936795391810600", "0.02624560436867219", "0"],
    ["-0.5084723270832399", "-3.71639374160988500", "2.21790664582949000", "0"],
    ["0", "2.30412222276248700", "-2.66055187655540200", "1.275350214666080"]
  ],
  "K0": [
    ["0.10630513138050800", "0", "0", "0"],
    ["0.39188176473763570", "0.18135555683856680", "0", "0"],
    ["-0.05671611789968874", "0.06216151000641002", "0.3773797141792473", "0"],
    ["-0.08101130220826174", "-0.03462160050989925", "0", "0.1300000000000000"]
  ],
  "AN": [
    ["3.321208926131899", "0", "0", "0"],
    ["-6.825690771130220", "1.096545539465253", "0.5537291752348234", "-0.08772005153993665"],
    ["5.504481844998321", "-1.589672639210835", "0.3213889335444567", "0.44690680951897520"],
    ["-2.000000000000000", "0.493127099745582", "-0.8751181087792801", "0.64081324202096150"]
  ],
  "KN": [
    ["0.4780945554021703", "0", "0", "0"],
    ["-0.7500000000000000", "0.3443968810148793", "0.03064999258349816", "0"],
    ["0.9263584006629529", "-0.2474620802680682", "0.34743387239297130", "0"],
    ["-0.4116869618629235", "0.1378269814151266", "0.03853141924782626", "0.06599889592052376"]
  ]
}"#;

pub(crate) const AP4O43DIG: &str = r#"{
  "name": "AP4o43dig",
  "s": 4, "q1": 4, "q2": 3,
  "c": ["139/1159", "11/19", "1", "1375/2014"],
  "A": [
    ["-2.604429828805958", "0", "0", "0"],
    ["6.603320924494022", "11.44234275562775", "0", "0"],
    ["0.5317173544040980", "-2.710438820206414", "3.550000000000000", "0"],
    ["-5.000000000000000", "2.026117385005894", "2.376616772673509", "-15.21524654319290"]
  ],
  "K": [
    ["-0.8973222553064913", "0", "0", "0"],
    ["0", "3.337407156628221", "0", "0"],
    ["0", "0", "1.164566261468968", "0"],
    ["0", "0", "0", "-2.604651162790698"]
  ],
  "A0": [
    ["-482.1874750642102", "4.750000000000000", "-5.916666666666667", "-6.500000000000000"],
    ["5295.612100386801", "78.73229010791468", "60.16394904407432", "7.222222222222222"],
    ["893.8003010294580", "-4.061724320422766", "9.736228361340601", "19.67879886925837"],
    ["-5707.694317901957", "-68.66254446706468", "-58.05689396607474", "-35.61626763467349"]
  ],
  "K0": [
    ["-49.91295086094522", "0.5250000000000000", "-3.439024390243902", "2.894736842105263"],
    ["405.5730073881453", "49.31516975831240", "8.193548387096774", "-3.428571428571429"],
    ["53.62032171809015", "12.67084977396168", "-1.304859285573478", "4.013292871986014"],
    ["-414.6382351541371", "-49.08870633833948", "-1.334271117642095", "-15.23643896150272"]
  ],
  "AN": [
    ["-3.754385964912281", "0.01222493887530562", "1.014925373134328", "-0.1403508771929825"],
    ["11.35280296428295", "45.64990373363066", "-15.17493010383148", "-20.79910559459065"],
    ["0.03205698176794144", "2.937595714981687", "-3.756123160591242", "2.666624105937791"],
    ["-7.630473981138614", "-48.59972438748765", "18.91612789128839", "18.27283236584584"]
  ],
  "KN": [
    ["-0.9578456075353955", "-0.3387096774193548", "0.1194029850746269", "0.8045112781954887"],
    ["11.57142857142857", "-96.60667975350700", "-20.12500000000000", "102.4846028390543"],
    ["3.761888534906390", "-33.44512959236514", "-5.865106921633463", "34.94704625261853"],
    ["-15.32045224098695", "134.2026156894527", "26.37615509001594", "-141.3196101415549"]
  ]
}"#;

pub(crate) const AP4O43DIE: &str = r#"{
  "name": "AP4o43die",
  "s": 4, "q1": 4, "q2": 3,
  "c": ["15/44", "5/4", "1/4", "23/12"],
  "A": [
    ["45808744223/19505421000", "0", "0", "0"],
    ["-279428522/187552125", "3/4", "0", "0"],
    ["285647/15004170", "22704013/125034750", "-11/10", "0"],
    ["1/4", "-11824391/41678250", "832579/4167825", "18014543/144484600"]
  ],
  "K": [
    ["35085281/25006950", "0", "0", "0"],
    ["0", "2300653/8335650", "0", "0"],
    ["0", "0", "-1780019/2500695", "0"],
    ["0", "0", "0", "2/61"]
  ],
  "A0": [
    ["1573/27", "1", "0", "0"],
    ["-29140496694667/1728480384000", "37071572404007/69715375488000", "37246788257/8450348544", "0"],
    ["-98934973036237/2160600480000", "-59311823623513/87144219360000", "-51770824817/13203669600", "0"],
    ["7653678714559/1387052160000", "-7872573544487/38730764160000", "-32557703329/23473190400", "18014543/144484600"]
  ],
  "K0": [
    ["110/9", "0", "0", "0"],
    ["4/5", "168095353644187/920242956441600", "-136571614975979/36809718257664", "0"],
    ["-9857504559041/1080300240000", "398472962076949/11503036955520000", "-18235836500357/18404859128832", "0"],
    ["-1423069729157/1440400320000", "398472962076949/7668691303680000", "136571614975979/61349530429440", "2/61"]
  ],
  "AN": [
    ["46268635184890481/6231747944448000", "0", "0", "0"],
    ["-843924159892681/239682613248000", "2095498352743/2535104563200", "240331128931/253510456320", "-10279031063/122060590080"],
    ["-4", "3733202770769/25351045632000", "-8883867896017/6337761408000", "-192302368031/24412118016000"],
    ["39222471881369/27696657530880", "-637146509711/2816782848000", "-191242568381/352097856000", "175009899277/8137372672000"]
  ],
  "KN": [
    ["95205971609617/35952391987200", "0", "0", "0"],
    ["0", "28298016708823/167316901171200", "-1296366536717/4182922529280", "0"],
    ["-958020525197/864240192000", "-2425439590003/104573063232000", "-27877023310129/41829225292800", "0"],
    ["-958020525197/14980163328000", "-2425439590003/69715375488000", "1296366536717/6971537548800", "-22310489177/4882423603200"]
  ]
}"#;

pub(crate) const AP4O43SIL: &str = r#"{
  "name": "AP4o43sil",
  "s": 4, "q1": 4, "q2": 3,
  "c": ["1/50", "3/5", "1", "41/85"],
  "A": [
    ["-3.40824065799546119", "0", "0", "0"],
    ["-10.5240959029253065", "-6.21116392867196304", "0", "0"],
    ["1.24215119761892880", "-3.47742608697035235", "3.58958480260299081", "0"],
    ["12.1231239821473188", "-3.03082301205062472", "1.32154050930321039", "9.37534909694123776"]
  ],
  "K": [
    ["-1.01874482010281778", "0", "0", "0"],
    ["0", "-1.85655642136068493", "0", "0"],
    ["0", "0", "1.07294973886097804", "0"],
    ["0", "0", "0", "2.80235150260250919"]
  ],
  "A0": [
    ["-18.6770976012982273", "-1.15212718448036531", "-0.684527356670693701", "0"],
    ["30.2098963703001422", "-19.0677876392318276", "-7.55433120044842482", "0"],
    ["-9.81986015015644262", "-2.15227598175855777", "4.86425591259034856", "0"],
    ["-57/25", "695/72", "8.28572795643498617", "9.37534909694128499"]
  ],
  "K0": [
    ["-11.4061014637853601", "-0.0776818914116313719", "-0.278650826939386227", "0"],
    ["59/28", "-13.9738118565057040", "1.13881886074868390", "0"],
    ["-2498819/583100", "2.75133184568842863", "0.477663277652266390", "0"],
    ["161/25", "779/80", "-0.352459713213735910", "2.80235150260251923"]
  ],
  "AN": [
    ["-3.93487127199009570", "75/26", "-7/8", "0"],
    ["-4.71932036763822580", "42.7928650670737006", "-3.60582429888170880", "-36.9240613682294166"],
    ["-71/202", "-2.31371287972058488", "0.191639567731266976", "1.90723457480523846"],
    ["9.00567678814317298", "-43.3637675719685003", "5.28918473115044182", "35.0168267934241781"]
  ],
  "KN": [
    ["-0.687420439097535868", "0", "0", "0"],
    ["247/72", "24.5972883813771674", "-2.02081177860650990", "-24.7095335501766993"],
    ["-0.427115478996059306", "-1780/289", "0.897376604330415086", "5.61580307958561348"],
    ["-3.39815952896990200", "-356/17", "1.56153637437775765", "22.4504633222483055"]
  ]
}"#;

pub(crate) const AP3O32F: &str = r#"{
  "name": "AP3o32f",
  "s": 3, "q1": 3, "q2": 2,
  "c": ["106/135", "3/5", "1"],
  "A": [
    ["-11/2", "0", "0"],
    ["6493/2700", "64/25", "0"],
    ["-25757/78300", "-121/100", "1783/580"]
  ],
  "K": [
    ["-93/50", "0", "0"],
    ["0", "44/25", "0"],
    ["0", "0", "11/10"]
  ],
  "A0": [
    ["-13474483/2809000", "0", "0"],
    ["2765681/1404500", "753641/273375", "0"],
    ["-48583191/81461000", "-1538339/1093500", "1783/580"]
  ],
  "K0": [
    ["-13474483/7155000", "0", "0"],
    ["0", "2513302/1366875", "0"],
    ["0", "0", "11/10"]
  ],
  "AN": [
    ["-3", "0", "0"],
    ["-559409/391500", "5418793/1458000", "2257039/1691280"],
    ["1733909/391500", "-5418793/1458000", "-565759/1691280"]
  ],
  "KN": [
    ["-1190159/978750", "0", "0"],
    ["0", "5418793/3645000", "0"],
    ["0", "0", "2257039/4228200"]
  ]
}"#;

pub(crate) const ALL: [(&str, &str); 6] = [
    ("AP4o43bdf", AP4O43BDF),
    ("AP4o43dif", AP4O43DIF),
    ("AP4o43dig", AP4O43DIG),
    ("AP4o43die", AP4O43DIE),
    ("AP4o43sil", AP4O43SIL),
    ("AP3o32f", AP3O32F),
];
