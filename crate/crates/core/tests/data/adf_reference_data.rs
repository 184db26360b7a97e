// A fixed 500-point standard-normal draw and the ADF statistics a
// reference implementation reports for it (regression with intercept,
// fixed lag). The series is frozen so the expected values stay valid
// verbatim.

pub const WHITE_NOISE_500: [f64; 500] = [
    -1.1956938657757656,
    -0.9134957839162617,
    1.6805232214012276,
    -0.816629299356608,
    1.5810801689707927,
    -1.0506387839377302,
    0.5622962214235067,
    0.9456016837576203,
    1.0868120866924709,
    1.0385664106153356,
    -0.5340475406063029,
    0.25694531944806437,
    -0.006114005904705482,
    -0.007903136876315742,
    -0.4132072684449613,
    0.8620361346030498,
    1.0795659144584266,
    1.8215410822785472,
    -0.4826636750721838,
    1.477923590460997,
    0.8662371301316794,
    0.5301427056558248,
    -0.53914658560765,
    0.29924520165796725,
    0.6484486316833707,
    0.06101923566609704,
    0.01625311850413286,
    0.4740839798057434,
    -0.6725749521919774,
    2.4415927334813525,
    -1.821517890420905,
    0.8460905257132088,
    0.4052013886021186,
    -0.9207009719109617,
    -0.29605125827893963,
    2.0026863041254837,
    0.6230909167054454,
    0.8666971316968864,
    -0.3902512640638944,
    -0.6778550028114007,
    1.3263150352029163,
    -0.4976509332159451,
    -1.4583570526948602,
    0.6978649991843054,
    0.2445665217764521,
    0.015856002687446868,
    0.8446376704312762,
    -0.8229952391625612,
    -1.3387021662216798,
    0.8459341478494519,
    0.8831610723816254,
    0.13007726528864533,
    -1.402327890571257,
    -1.843596457655488,
    -0.9179552749673393,
    -0.19088022220557993,
    -0.8793956680895848,
    -0.05766682265195555,
    -0.16343643510234307,
    -0.9740380823983181,
    -0.5365156573335659,
    0.5152315131721041,
    -1.0166054857867022,
    -0.10162478791983338,
    -1.8433673450845283,
    -0.04312594501095681,
    2.1503093854950897,
    0.5083480983884148,
    1.8018427200657376,
    -1.3170837746634454,
    -0.8753461575373539,
    0.043901000618341665,
    -0.9068255851806664,
    0.4004894579869811,
    0.38589118666636013,
    0.7433679910450698,
    0.10997214617971802,
    1.900237680238343,
    -1.2540961109548723,
    -0.25006906966037873,
    -0.38936561863474495,
    0.34483278779714366,
    -0.4637791304769085,
    -0.2958017073002435,
    -0.18527055146251034,
    0.4671510780853548,
    -1.7189767372299973,
    0.511350548583115,
    1.5280843240557134,
    0.07052293108027005,
    0.9051604083867999,
    0.3910871215695968,
    -0.45823771548260345,
    0.024932408561612864,
    0.6611043495018919,
    -1.0730462991791665,
    -0.5671042648823814,
    -0.05785186340395041,
    -0.883983532589974,
    0.10321704175401489,
    -0.620167070573565,
    0.9373333084428306,
    -0.17304650500661029,
    -1.5760722161929734,
    1.4313660489693358,
    -0.1935682177664258,
    0.48299743504373266,
    -1.379252869193716,
    -0.6406069894776016,
    0.9646307674476289,
    -2.0332465946378466,
    1.6358646088266187,
    0.16548505699770136,
    -0.2823797183290816,
    -0.20619472936248814,
    0.5666122073308747,
    0.41807067581254354,
    -0.9017488670361917,
    0.7510080716317664,
    0.9380469770211293,
    1.139357660799842,
    0.8499117101467879,
    0.3462890702773837,
    0.5790155098879132,
    0.01793535727552746,
    0.015723302997886813,
    0.13151783635219083,
    2.316535585706671,
    -0.1420532185398614,
    -0.7221238483826893,
    -1.1244085753345991,
    0.11431551979993478,
    0.8380344294333059,
    -0.47232171435847786,
    1.8276841145095675,
    -0.03550527875190377,
    -0.8946997988944243,
    -1.05272849593165,
    -0.0628387534762501,
    0.15188724769948955,
    -0.1535931062594698,
    2.1968027738914415,
    -0.5143098205043299,
    1.255943606944072,
    -0.044951405467911494,
    0.576963507814388,
    1.269513334530493,
    -0.11096089912583985,
    1.4627102696526935,
    0.4021908207370393,
    -0.33213509438168015,
    0.028471344725041675,
    -0.9255224255769423,
    0.7089979187539444,
    -0.35490590073270023,
    -0.40628878861944057,
    -2.1597850928397717,
    -0.9053971270121508,
    1.9562601296235822,
    -0.26897511970620575,
    -1.2632279284011128,
    -0.8811544382051215,
    -0.87899443984579,
    -0.13120627274289198,
    0.35180017451107815,
    -0.7667545121705032,
    -0.6195258406623545,
    -0.13790200117000498,
    -0.3517037806652485,
    0.7276168333726702,
    -1.0303835358595947,
    1.537794070437105,
    1.6418710241172985,
    0.7776268496721456,
    0.19413582407199612,
    -1.16579842698722,
    -1.70111326767977,
    0.0716993159776996,
    0.19136478417650982,
    0.1054025984431578,
    0.9396061808887103,
    0.36590969397728423,
    -0.5914676503965414,
    1.0335642584744014,
    -0.20070878253844152,
    -1.315460572770103,
    0.1785620973806909,
    -0.7076515710710052,
    -0.02599642456824118,
    -1.4676587230840479,
    1.5724953550873175,
    -0.7105414694947515,
    -0.8222701879570208,
    -1.5219757963582379,
    -0.004662291185161395,
    0.20958633558203116,
    1.3091732100043962,
    0.228080716960181,
    -2.675434326250856,
    -1.0939254651261632,
    0.9169496679289223,
    -0.10102971395060367,
    -0.32432255680754496,
    0.35715500493443103,
    1.5606909895216499,
    -0.7251507101626467,
    0.9524914018151374,
    -0.002534049437922924,
    0.3225598615212144,
    -0.07450918863829101,
    1.612621086839211,
    0.47531271389745927,
    0.10468390356252402,
    -0.6025622805174019,
    -1.3013985742140353,
    1.5385558830003978,
    0.14955297481520463,
    -0.058898989169700294,
    0.1037678778889274,
    1.9173294808911179,
    0.1907845481811579,
    0.6194612580366139,
    0.24512965772059112,
    0.9222643730430841,
    -0.8707081696677621,
    -0.878947662418065,
    0.598755392025993,
    -0.5010939482907687,
    0.4740496045125976,
    -2.237559621238676,
    -1.287685259218433,
    0.3484294915744681,
    -0.29028233758802097,
    1.2038371164180077,
    0.07794609632872909,
    -0.6845172994879667,
    -1.514413090440991,
    0.5074611844525413,
    -0.8874466249124352,
    -0.3128677434513206,
    -0.45120277775120915,
    0.36561351035086015,
    -0.026730746124004025,
    -0.3967265208990409,
    -0.19576298500001652,
    0.18604130686824313,
    -0.7582157625700161,
    0.47179473720921467,
    -2.142754277376298,
    -0.6049063081582962,
    1.6448493628260137,
    2.3279102468572135,
    0.2723444390508268,
    0.271856002124404,
    -1.5082361903065606,
    -0.17513502100916628,
    -1.8913493030777018,
    -2.045443247885266,
    0.054212703590851716,
    0.2395047322777354,
    -0.6903425523304151,
    -0.10824385692633753,
    -0.4973332977285114,
    0.2643143707398168,
    -0.39361046803836514,
    -0.34200302427297374,
    -0.036118596305376616,
    0.9748976794509029,
    -0.19642708341660373,
    0.17202844400668849,
    0.024391083413777447,
    -1.8622629517956129,
    0.7132334593546484,
    0.5375935244197688,
    0.7492752779919244,
    1.2045084559296728,
    -0.8646289771182751,
    1.2936350318118228,
    -0.32484358010198927,
    2.744258521563886,
    -0.5532165981764067,
    0.6739925174821436,
    -0.966895563519543,
    0.22431605357156092,
    -0.14514930465464507,
    1.3142335370783746,
    0.8893509641071509,
    -0.002434242531114481,
    0.11922812023004203,
    0.7502400326470573,
    0.21186931897103267,
    0.5145453686654055,
    -1.7618667471561726,
    -0.31393084519302455,
    1.8978366342393025,
    0.3084213018463575,
    0.32708550971866635,
    1.3762733084085002,
    1.0908238350092911,
    1.5537528667243365,
    0.7625123667267137,
    0.5158239413793022,
    0.253316309297972,
    -0.7740057989534213,
    0.2941951916178058,
    0.7423519492696719,
    1.0965440495917276,
    -0.45972622673509744,
    0.01105945843352531,
    -0.046863661346211415,
    -1.873127595428358,
    -0.7857350639849944,
    1.1817054075731632,
    -1.101411727888451,
    -0.4949299732938188,
    -0.1476398251115744,
    0.19713105106138026,
    -0.5774225020439141,
    -0.8577468327731084,
    -0.41796740158776013,
    -1.8631897858659576,
    1.4994290507209582,
    1.2195265701305302,
    0.07410973664311021,
    0.7951880104505369,
    -1.3757327106718418,
    -0.823003750596228,
    -0.2718196335347941,
    0.09674020694486243,
    -2.79566455312013,
    1.3256124583455131,
    -2.477679250031734,
    -0.9632346711287866,
    1.130169875018296,
    1.1505070892362699,
    1.3946647671701082,
    -0.5206231120819362,
    1.313404912761589,
    0.9304779288100196,
    0.5612314204970809,
    0.030053763256879074,
    0.6595603878086654,
    0.10498818128595572,
    0.473128708087734,
    -0.29932112813491474,
    -0.3504785581481195,
    0.5353543362748344,
    -1.3435397390335144,
    -1.0274125718921767,
    -1.1827552883040433,
    0.139939723837757,
    0.6324935445591597,
    -1.2981137052955354,
    -1.0108636551784342,
    -0.6281467294383387,
    1.231474287844318,
    -1.0195331909259708,
    -0.764205958984987,
    0.5907875032198271,
    -2.665219512636904,
    -1.7460391477470898,
    0.06183338071206014,
    -0.2774356159553373,
    -0.756225293410805,
    1.2723524597030387,
    -2.1215296850219305,
    -0.049248257462185856,
    0.2605589661710389,
    0.17133673014908535,
    0.7251379053815629,
    -0.4985301112461515,
    1.0778880703183933,
    0.17187614844644766,
    1.1666364668973073,
    -0.6024933885881871,
    0.10119310900788424,
    -0.010925599612018734,
    0.45781042482811235,
    0.045989377994120076,
    1.6460697588857842,
    0.8954507798964211,
    0.7633780657062643,
    -1.8342688525952413,
    -0.44686554816191465,
    -0.3046682126837731,
    0.6460850450507898,
    -0.8703095483861623,
    -1.5472769994145656,
    0.6308666078942439,
    -1.7654554779764469,
    -1.7396862617339994,
    -0.07570419797970973,
    0.47115861954204247,
    0.9166341148292658,
    1.3044782358994014,
    -0.1931650432413448,
    1.0964948372242906,
    0.33187761087557904,
    -0.37685630454512636,
    -1.0670646601457063,
    1.4154920463810916,
    -0.4760119661700787,
    0.5927923092041049,
    -1.4213388223829022,
    1.6544263335547802,
    -1.3124245755284527,
    -0.9919584014964098,
    -0.3683010501714105,
    0.6954718132658876,
    2.5459810473853977,
    0.5193248647474973,
    -0.4406557488402841,
    -0.6030085673995212,
    -1.017728931672238,
    1.0396047436520117,
    0.7595875305769776,
    -1.6294178333074076,
    -0.021411413906828308,
    0.005242110249626725,
    -0.6946215259591244,
    -0.47946008406325646,
    -1.1139431648994236,
    0.8115397152374405,
    0.6125181124772975,
    -0.11845332468997569,
    1.12632623965844,
    -1.1723818783592352,
    -0.5727064649108673,
    0.5248991432595541,
    0.5955608956781542,
    -2.8184876290336147,
    0.2682449893667761,
    0.5150382453567777,
    -1.4331425584693445,
    -0.1922642433417039,
    0.10018273144427532,
    0.8694085716704645,
    -0.9967982692394298,
    -0.2060518023504537,
    -1.1669392433339343,
    -1.1707248336126945,
    -0.6945784057930957,
    -0.7818511578059328,
    0.11871952880131321,
    1.9944811807849894,
    1.1539684361407492,
    0.6566890437179632,
    -1.0275420928768018,
    -0.5827250502326099,
    -1.8223359642235066,
    -0.4838439662454387,
    0.9984657022999411,
    -0.4008293105542985,
    1.7057549981802909,
    0.3892825479016611,
    1.6320416803522337,
    0.33438034821385154,
    -0.17597589121133633,
    1.6228959416497721,
    0.06117604489608588,
    1.416536402199672,
    0.08489633578874946,
    -0.27815769016668157,
    -1.3687669640813824,
    -0.07191026108274653,
    -0.15456374231563172,
    0.19513565542654496,
    0.6583990477420651,
    -2.685484596845348,
    1.1646262451538476,
    0.3734561907247671,
    -0.5221168212377938,
    0.6042441500645426,
    -2.4635075831772406,
    1.400423156623683,
    0.6094240893218443,
    0.6692142866502974,
    0.10896120516707268,
    0.08625380564063821,
    0.9474479739836232,
    0.23358492566395478,
    -0.49282478023583765,
    0.08433059746653383,
    -0.14385665771712475,
    -1.0055714022256412,
    -0.12517507565008018,
    -1.075913616524108,
    -0.22871343931492652,
    -0.2601257421160516,
    -1.9330140609164177,
    0.541260050320532,
    0.05655163854744514,
    0.8464749330572059,
    -0.1471950433989203,
    0.07068709794192886,
    0.8128404570840859,
    -0.6776471064811893,
    -0.0350302541976229,
    -0.6500714287053191,
    0.2968147605178685,
];

// (lag, expected ADF statistic) for the frozen series.
pub const EXPECTED_WHITE_STATS: [(usize, f64); 3] = [
    (1, -15.233228574111),
    (5, -8.880783760828),
    (10, -6.261739638363),
];

// Expected statistic for the cumulative sum of the frozen series, lag 1.
pub const EXPECTED_WALK_STAT_LAG1: f64 = -2.357527261059;
